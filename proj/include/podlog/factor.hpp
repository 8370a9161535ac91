#pragma once

// Univariate polynomial factorization over tower levels: squarefree /
// distinct-degree / equal-degree pipeline with seeded randomness, plus
// irreducibility, root extraction, random irreducibles, conjugate norms,
// minimal polynomials, seeded tower construction and cross-tower embeddings.
//
// All exponentiation with field-cardinality-sized exponents goes through
// iterated p-power maps, so levels whose cardinality exceeds 2^64 are fine.

#include <algorithm>
#include <map>

#include "podlog/poly.hpp"

namespace podlog {

struct Factorization {
  Elem unit;                               // leading coefficient of the input
  std::vector<std::pair<Poly, int>> factors;  // monic irreducible, multiplicity; canonical order
};

namespace detail {

// Char-p squarefree decomposition: returns (monic squarefree part, multiplicity) pairs.
inline void squarefree_rec(const Poly& f, int outer_mult,
                           std::vector<std::pair<Poly, int>>& out) {
  const TowerPtr& t = f.tw;
  int lvl = f.lvl;
  uint64_t p = t->p();
  Poly fp = f.derivative();
  if (fp.is_zero()) {
    // f = h(x^p); take p-th roots of the coefficients.
    RawPoly h((size_t)(f.deg() / (int)p) + 1);
    for (size_t i = 0; i < h.size(); ++i) h[i] = t->pth_root(lvl, f.coeff(i * p));
    squarefree_rec(Poly(t, lvl, std::move(h)), outer_mult * (int)p, out);
    return;
  }
  Poly c = poly_gcd(f, fp);
  Poly w = (f / c);
  int i = 1;
  while (!w.is_one()) {
    Poly y = poly_gcd(w, c);
    Poly z = w / y;
    if (!z.is_one()) out.push_back({z, i * outer_mult});
    w = y;
    c = c / y;
    ++i;
  }
  // The remainder is a p-th power; its zero-derivative branch applies the
  // extra factor of p.
  if (!c.is_one()) squarefree_rec(c, outer_mult, out);
}

// Distinct-degree decomposition of a monic squarefree polynomial.
inline std::vector<std::pair<Poly, int>> distinct_degree(const Poly& fin) {
  Poly f = fin;
  std::vector<std::pair<Poly, int>> out;
  Poly x = Poly::x(f.tw, f.lvl);
  Poly h = x % f;
  int d = 0;
  while (f.deg() > 0 && 2 * (d + 1) <= f.deg()) {
    ++d;
    h = poly_p_power_iter_mod(h, f.tw->abs_degree(f.lvl), f);
    Poly g = poly_gcd(h - x, f);
    if (g.deg() > 0) {
      out.push_back({g, d});
      f = f / g;
      h = h % f;
    }
  }
  if (f.deg() > 0) out.push_back({f, f.deg()});
  return out;
}

// Cantor–Zassenhaus equal-degree splitting: f monic squarefree, all
// irreducible factors of degree e.
inline void equal_degree(const Poly& f, int e, Rng& rng, std::vector<Poly>& out) {
  if (f.deg() == e) {
    out.push_back(f);
    return;
  }
  const TowerPtr& t = f.tw;
  int lvl = f.lvl;
  uint64_t p = t->p();
  uint64_t m_abs = t->abs_degree(lvl) * (uint64_t)e;  // roots live in a field with p^m_abs elements
  for (;;) {
    Poly T = random_poly_below(t, lvl, f.deg(), rng);
    if (T.deg() < 1) continue;
    Poly g = poly_gcd(T, f);
    if (g.deg() > 0 && g.deg() < f.deg()) {
      equal_degree(g, e, rng, out);
      equal_degree(f / g, e, rng, out);
      return;
    }
    Poly u = Poly::zero(t, lvl);
    if (p == 2) {
      // trace map T + T^2 + T^4 + ... over F_2
      Poly cur = T % f;
      u = cur;
      for (uint64_t i = 1; i < m_abs; ++i) {
        cur = poly_p_power_iter_mod(cur, 1, f);
        u = u + cur;
      }
    } else {
      // T^((p^m - 1)/2) = W^((p-1)/2) with W = T^(1 + p + ... + p^(m-1))
      Poly cur = T % f;
      Poly W = cur;
      for (uint64_t i = 1; i < m_abs; ++i) {
        cur = poly_p_power_iter_mod(cur, 1, f);
        W = (W * cur) % f;
      }
      u = poly_powmod(W, (p - 1) / 2, f) - Poly::one(t, lvl);
    }
    g = poly_gcd(u, f);
    if (g.deg() > 0 && g.deg() < f.deg()) {
      equal_degree(g, e, rng, out);
      equal_degree(f / g, e, rng, out);
      return;
    }
  }
}

}  // namespace detail

// Full factorization; the equal-degree step is seeded but the output order is
// canonical, so results do not depend on the seed.
inline Factorization factorize(const Poly& fin, uint64_t seed = 0x5eed) {
  require(!fin.is_zero(), Err::ZeroPolynomial, "factorize: zero polynomial");
  auto [f, unit] = fin.make_monic();
  Factorization out;
  out.unit = unit;
  if (f.deg() == 0) return out;
  std::vector<std::pair<Poly, int>> sqf;
  detail::squarefree_rec(f, 1, sqf);
  Rng rng(sub_seed(seed, 0xfac701));
  for (auto& [part, mult] : sqf) {
    for (auto& [prod, e] : detail::distinct_degree(part)) {
      std::vector<Poly> irr;
      detail::equal_degree(prod, e, rng, irr);
      for (auto& g : irr) out.factors.push_back({g, mult});
    }
  }
  std::sort(out.factors.begin(), out.factors.end(),
            [](const auto& a, const auto& b) { return poly_less(a.first, b.first); });
  return out;
}

inline Poly expand_factorization(const Factorization& fac, const TowerPtr& t, int lvl) {
  Poly r = Poly::constant(t, lvl, fac.unit);
  for (auto& [g, m] : fac.factors)
    for (int i = 0; i < m; ++i) r = r * g;
  return r;
}

inline bool is_irreducible(const Poly& f) {
  require(f.deg() >= 1, Err::ConstantPolynomial, "is_irreducible: constant input");
  return f.tw->rp_irreducible(f.lvl, f.c);
}

struct RootsReport {
  std::vector<std::pair<Elem, int>> roots;  // (root, multiplicity), canonical order
  bool splits_completely = false;           // all roots rational counted with multiplicity
  bool distinct = false;                    // every rational root simple
};

// Rational roots via gcd(f, x^#K - x), then degree-one equal-degree splitting.
inline RootsReport roots_and_split_test(const Poly& f, uint64_t seed = 0x5eed) {
  require(!f.is_zero(), Err::ZeroPolynomial, "roots of zero polynomial");
  RootsReport rep;
  const TowerPtr& t = f.tw;
  int lvl = f.lvl;
  if (f.deg() == 0) {
    rep.splits_completely = true;
    rep.distinct = true;
    return rep;
  }
  Poly x = Poly::x(t, lvl);
  Poly xq = poly_x_card_powmod(f, 1);
  Poly g = poly_gcd(xq - x, f);
  std::vector<Poly> linears;
  if (g.deg() >= 1) {
    Rng rng(sub_seed(seed, 0x700705));
    detail::equal_degree(g, 1, rng, linears);
  }
  int total_mult = 0;
  bool all_simple = true;
  std::vector<std::pair<Elem, int>> roots;
  for (auto& l : linears) {
    Elem root = t->neg(lvl, l.coeff(0));
    int mult = 0;
    Poly rem = f;
    for (;;) {
      auto [q, r] = rem.divrem(l);
      if (!r.is_zero()) break;
      rem = q;
      ++mult;
    }
    roots.push_back({root, mult});
    total_mult += mult;
    if (mult != 1) all_simple = false;
  }
  std::sort(roots.begin(), roots.end(),
            [](const auto& a, const auto& b) { return FieldTower::elem_less(a.first, b.first); });
  rep.roots = std::move(roots);
  rep.splits_completely = (total_mult == f.deg());
  rep.distinct = all_simple;
  return rep;
}

inline Poly random_irreducible(const TowerPtr& t, int lvl, int degree, Rng& rng) {
  require(degree >= 1, Err::DegreeZero, "random_irreducible: degree must be positive");
  for (;;) {
    Poly f = random_monic(t, lvl, degree, rng);
    if (degree == 1 || is_irreducible(f)) return f;
  }
}

// Product of all Galois conjugates of f over base_level; lands in the base.
inline Poly conjugate_norm(const Poly& f, int base_level) {
  const TowerPtr& t = f.tw;
  require(base_level <= f.lvl, Err::LevelMismatch, "conjugate_norm: base above level");
  uint64_t ext = t->abs_degree(f.lvl) / t->abs_degree(base_level);
  Poly prod = f;
  Poly cur = f;
  for (uint64_t i = 1; i < ext; ++i) {
    cur = cur.coeff_frobenius(base_level, 1);
    prod = prod * cur;
  }
  return prod.section_to(base_level);
}

// Minimal polynomial of `a` over base_level (conjugate product) together with
// the norm over the base.
struct NormMinpoly {
  FieldElement norm;  // at base_level
  Poly minpoly;       // monic over base_level
};

inline NormMinpoly norm_and_minpoly(const FieldElement& a, int base_level) {
  const TowerPtr& t = a.tower;
  require(base_level <= a.level, Err::LevelMismatch, "norm_and_minpoly: base above level");
  uint64_t ext = t->abs_degree(a.level) / t->abs_degree(base_level);
  std::vector<Elem> conj{a.v};
  Elem cur = a.v;
  for (;;) {
    cur = t->frob_p_power(a.level, cur, t->abs_degree(base_level));
    if (cur == a.v) break;
    conj.push_back(cur);
  }
  uint64_t deg = conj.size();
  require(ext % deg == 0, Err::Internal, "conjugate orbit size must divide extension degree");
  Poly mp = Poly::one(t, a.level);
  Elem prod = t->one(a.level);
  for (auto& c : conj) {
    mp = mp * Poly::linear_root(t, a.level, c);
    prod = t->mul(a.level, prod, c);
  }
  Elem norm_top = t->pow(a.level, prod, ext / deg);
  return {{t, base_level, t->section(norm_top, a.level, base_level)},
          mp.section_to(base_level)};
}

inline Poly minimal_polynomial(const FieldElement& a, int base_level) {
  return norm_and_minpoly(a, base_level).minpoly;
}

// ---------------------------------------------------------------------------
// Seeded tower construction: defining polynomials are found by seeded random
// search with the irreducibility check; rejects reducible candidates.
// ---------------------------------------------------------------------------

inline TowerPtr tower_build(uint64_t p, const std::vector<uint32_t>& degrees, uint64_t seed) {
  require(!degrees.empty(), Err::DegreeZero, "tower_build: empty degree list");
  for (uint32_t d : degrees) require(d >= 1, Err::DegreeZero, "tower_build: zero degree");
  TowerPtr t = FieldTower::prime_field(p);
  for (size_t i = 0; i < degrees.size(); ++i) {
    Rng rng(sub_seed(seed, 0x70e3, i));
    Poly f = random_irreducible(t, t->top_level(), (int)degrees[i], rng);
    t = t->extend(f.c);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Embeddings. Within one chain an embedding is zero-padding; across chains
// that share a structural prefix, the image of each remaining generator is
// found as a root of its defining polynomial in the target.
// ---------------------------------------------------------------------------

class FieldEmbedding {
 public:
  // Same-chain embedding.
  FieldEmbedding(TowerPtr tower, int src_level, int dst_level)
      : src_(tower), src_lvl_(src_level), dst_(std::move(tower)), dst_lvl_(dst_level), nested_(true) {
    require(src_level <= dst_level, Err::LevelMismatch, "embedding: source above target");
  }

  // Cross-chain embedding; towers must agree structurally on levels
  // 0..common, and abs_degree(src_level) must divide abs_degree(dst_level).
  static FieldEmbedding build(const TowerPtr& src, int src_level, const TowerPtr& dst,
                              int dst_level, int common_level) {
    require(src->p() == dst->p(), Err::LevelMismatch, "embedding: different characteristics");
    require(common_level <= src_level && common_level <= dst_level, Err::LevelMismatch,
            "embedding: bad common level");
    for (int i = 0; i <= common_level; ++i) {
      require(src->level(i).degree == dst->level(i).degree &&
                  src->level(i).defining == dst->level(i).defining,
              Err::LevelMismatch, "embedding: towers disagree below the common level");
    }
    require(dst->abs_degree(dst_level) % src->abs_degree(src_level) == 0, Err::NotInSubfield,
            "embedding: source does not divide target in the degree lattice");
    FieldEmbedding e(src, src_level, dst, dst_level, common_level);
    // Image of each generator above the shared prefix: canonical least root
    // of the (mapped) defining polynomial in the target.
    for (int l = common_level + 1; l <= src_level; ++l) {
      RawPoly mapped(src->level(l).defining.size());
      for (size_t i = 0; i < mapped.size(); ++i)
        mapped[i] = e.apply_raw(src->level(l).defining[i], l - 1);
      Poly fp(dst, dst_level, std::move(mapped));
      auto roots = roots_and_split_test(fp);
      require(!roots.roots.empty(), Err::NotInSubfield,
              "embedding: defining polynomial has no root in the target");
      e.gen_images_.push_back(roots.roots.front().first);
    }
    return e;
  }

  Elem apply(const Elem& a) const { return apply_raw(a, src_lvl_); }

  FieldElement apply(const FieldElement& a) const {
    require(a.level == src_lvl_, Err::LevelMismatch, "embedding: wrong source level");
    return {dst_, dst_lvl_, apply_raw(a.v, src_lvl_)};
  }

  Poly apply(const Poly& f) const {
    RawPoly r(f.c.size());
    for (size_t i = 0; i < r.size(); ++i) r[i] = apply_raw(f.c[i], src_lvl_);
    return Poly(dst_, dst_lvl_, std::move(r));
  }

  // Preimage; NotInSubfield when the element is outside the image. Solved by
  // F_p-linear algebra against the embedding matrix.
  Elem section(const Elem& a) const {
    if (nested_) return src_->section(a, dst_lvl_, src_lvl_);
    ensure_matrix();
    size_t n_src = src_->abs_degree(src_lvl_);
    size_t n_dst = dst_->abs_degree(dst_lvl_);
    uint64_t p = src_->p();
    // Fresh Gaussian elimination on [M | a] over F_p.
    size_t w = n_src + 1;
    std::vector<limb> A(n_dst * w);
    for (size_t i = 0; i < n_dst; ++i) {
      for (size_t j = 0; j < n_src; ++j) A[i * w + j] = matrix_[i * n_src + j];
      A[i * w + n_src] = a[i];
    }
    std::vector<size_t> pivot_col;
    size_t row = 0;
    for (size_t col = 0; col < n_src && row < n_dst; ++col) {
      size_t sel = row;
      while (sel < n_dst && A[sel * w + col] == 0) ++sel;
      if (sel == n_dst) continue;
      for (size_t j = 0; j < w; ++j) std::swap(A[sel * w + j], A[row * w + j]);
      uint64_t inv = modinv_u64(A[row * w + col], p);
      for (size_t j = 0; j < w; ++j) A[row * w + j] = (limb)((uint64_t)A[row * w + j] * inv % p);
      for (size_t r = 0; r < n_dst; ++r) {
        if (r == row) continue;
        uint64_t c = A[r * w + col];
        if (!c) continue;
        for (size_t j = 0; j < w; ++j) {
          uint64_t s = (uint64_t)A[r * w + j] + p - (uint64_t)A[row * w + j] * c % p;
          A[r * w + j] = (limb)(s % p);
        }
      }
      pivot_col.push_back(col);
      ++row;
    }
    for (size_t r = row; r < n_dst; ++r)
      require(A[r * w + n_src] == 0, Err::NotInSubfield, "section: element not in embedded subfield");
    Elem x(n_src, 0);
    for (size_t i = 0; i < pivot_col.size(); ++i) x[pivot_col[i]] = A[i * w + n_src];
    return x;
  }

  const TowerPtr& src_tower() const { return src_; }
  const TowerPtr& dst_tower() const { return dst_; }
  int src_level() const { return src_lvl_; }
  int dst_level() const { return dst_lvl_; }

 private:
  FieldEmbedding(TowerPtr src, int src_lvl, TowerPtr dst, int dst_lvl, int common)
      : src_(std::move(src)), src_lvl_(src_lvl), dst_(std::move(dst)), dst_lvl_(dst_lvl),
        common_(common), nested_(false) {}

  // Map an element living at src level `lvl` (<= src_lvl_) into the target.
  Elem apply_raw(const Elem& a, int lvl) const {
    if (nested_) return dst_->embed_up(a, lvl, dst_lvl_);
    if (lvl <= common_) return dst_->embed_up(a, lvl, dst_lvl_);
    // Horner in the image of this level's generator.
    RawPoly ch = src_->chunks(lvl, a);
    const Elem& img = gen_images_[(size_t)(lvl - common_ - 1)];
    Elem acc = dst_->zero(dst_lvl_);
    for (size_t i = ch.size(); i-- > 0;) {
      acc = dst_->mul(dst_lvl_, acc, img);
      acc = dst_->add(dst_lvl_, acc, apply_raw(ch[i], lvl - 1));
    }
    return acc;
  }

  void ensure_matrix() const {
    if (!matrix_.empty()) return;
    size_t n_src = src_->abs_degree(src_lvl_);
    size_t n_dst = dst_->abs_degree(dst_lvl_);
    matrix_.assign(n_dst * n_src, 0);
    for (size_t j = 0; j < n_src; ++j) {
      Elem basis(n_src, 0);
      basis[j] = 1;
      Elem img = apply_raw(basis, src_lvl_);
      for (size_t i = 0; i < n_dst; ++i) matrix_[i * n_src + j] = img[i];
    }
  }

  TowerPtr src_;
  int src_lvl_;
  TowerPtr dst_;
  int dst_lvl_;
  int common_ = 0;
  bool nested_ = false;
  std::vector<Elem> gen_images_;
  mutable std::vector<limb> matrix_;
};

}  // namespace podlog
