#pragma once

// Exact arithmetic in explicit finite-field towers F_p = L0 ⊂ L1 ⊂ ... where
// each level is defined by a monic irreducible polynomial over the level
// below. Elements are flat little-endian F_p coefficient vectors; an element
// of level i is the concatenation of its deg_i chunks over level i-1, so
// embedding a lower-level element is zero-padding.
//
// The tower also exposes "raw" dense polynomial kernels over any level
// (multiplication, division, gcd, modular powering). The typed Poly wrapper
// in poly.hpp sits on top of these.

#include <atomic>
#include <cstring>
#include <memory>
#include <sstream>

#include "podlog/util.hpp"

namespace podlog {

using limb = uint32_t;
using Elem = std::vector<limb>;      // flat F_p coefficients, fixed length per level
using RawPoly = std::vector<Elem>;   // dense little-endian coefficients

class FieldTower;
using TowerPtr = std::shared_ptr<const FieldTower>;

class FieldTower : public std::enable_shared_from_this<FieldTower> {
 public:
  struct Level {
    std::string name;
    uint32_t degree = 1;    // over the previous level
    RawPoly defining;       // monic, degree+1 coefficients over the previous level
    uint64_t abs_deg = 1;   // degree over F_p == limb count of elements
    uint64_t uid = 0;       // prefix-compatibility id
    bool card_fits = true;  // p^abs_deg fits in uint64_t
    uint64_t card = 0;      // p^abs_deg when card_fits
  };

  static TowerPtr prime_field(uint64_t p, const std::string& name = "") {
    require(p >= 2 && p < (1ULL << 31) && is_prime_u64(p), Err::NotPrime,
            "tower: p must be a prime below 2^31");
    auto t = std::shared_ptr<FieldTower>(new FieldTower());
    t->p_ = p;
    Level l0;
    l0.name = name.empty() ? ("F" + std::to_string(p)) : name;
    l0.degree = 1;
    l0.abs_deg = 1;
    l0.uid = next_uid();
    l0.card_fits = true;
    l0.card = p;
    t->levels_.push_back(std::move(l0));
    return t;
  }

  // New tower sharing this one's levels plus one more. `defining` is monic of
  // degree >= 1 over the current top level and is checked irreducible.
  TowerPtr extend(const RawPoly& defining, const std::string& name = "") const {
    int top = num_levels() - 1;
    RawPoly f = rp_normalized(top, defining);
    require(rp_deg(f) >= 1, Err::DegreeZero, "extend: defining polynomial must be non-constant");
    require(elem_eq(f.back(), one(top)), Err::NotIrreducible, "extend: defining polynomial must be monic");
    require(rp_irreducible(top, f), Err::NotIrreducible,
            "extend: defining polynomial is reducible");
    auto t = std::shared_ptr<FieldTower>(new FieldTower());
    t->p_ = p_;
    t->levels_ = levels_;
    Level l;
    l.degree = (uint32_t)rp_deg(f);
    l.defining = std::move(f);
    l.abs_deg = levels_.back().abs_deg * l.degree;
    l.uid = next_uid();
    auto c = checked_pow_u64(p_, l.abs_deg);
    l.card_fits = c.has_value();
    l.card = c.value_or(0);
    if (name.empty()) {
      std::ostringstream os;
      os << "F" << p_;
      if (l.abs_deg > 1) os << "^" << l.abs_deg;
      l.name = os.str();
    } else {
      l.name = name;
    }
    t->levels_.push_back(std::move(l));
    return t;
  }

  uint64_t p() const { return p_; }
  int num_levels() const { return (int)levels_.size(); }
  int top_level() const { return (int)levels_.size() - 1; }
  const Level& level(int i) const { return levels_.at((size_t)i); }
  uint64_t abs_degree(int i) const { return level(i).abs_deg; }
  bool card_fits_u64(int i) const { return level(i).card_fits; }
  uint64_t card_u64(int i) const {
    require(level(i).card_fits, Err::TooLarge, "cardinality exceeds 2^64");
    return level(i).card;
  }

  // Two towers interoperate at `lvl` if they agree (same construction chain)
  // on all levels up to lvl.
  bool compatible_at(const FieldTower& other, int lvl) const {
    if (this == &other) return lvl <= top_level();
    if (lvl > top_level() || lvl > other.top_level()) return false;
    for (int i = 0; i <= lvl; ++i)
      if (levels_[(size_t)i].uid != other.levels_[(size_t)i].uid) return false;
    return true;
  }

  // ---- element basics -------------------------------------------------

  Elem zero(int lvl) const { return Elem(abs_degree(lvl), 0); }

  Elem one(int lvl) const {
    Elem e(abs_degree(lvl), 0);
    e[0] = 1;
    return e;
  }

  Elem from_u64(int lvl, uint64_t c) const {
    Elem e(abs_degree(lvl), 0);
    e[0] = (limb)(c % p_);
    return e;
  }

  // The generator adjoined at `lvl` (the class of the defining variable).
  Elem gen(int lvl) const {
    require(lvl >= 1, Err::LevelMismatch, "gen: prime field has no generator");
    Elem e(abs_degree(lvl), 0);
    e[abs_degree(lvl - 1)] = 1;
    return e;
  }

  bool is_zero(const Elem& a) const {
    for (limb x : a)
      if (x) return false;
    return true;
  }

  bool is_one(int lvl, const Elem& a) const { return elem_eq(a, one(lvl)); }

  static bool elem_eq(const Elem& a, const Elem& b) { return a == b; }

  // Canonical order: mixed-radix numeric value (most significant limb last).
  static bool elem_less(const Elem& a, const Elem& b) {
    for (size_t i = a.size(); i-- > 0;) {
      if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
  }

  // ---- element arithmetic ---------------------------------------------

  Elem add(int, const Elem& a, const Elem& b) const {
    Elem r(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
      uint64_t s = (uint64_t)a[i] + b[i];
      r[i] = (limb)(s >= p_ ? s - p_ : s);
    }
    return r;
  }

  Elem sub(int, const Elem& a, const Elem& b) const {
    Elem r(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
      int64_t s = (int64_t)a[i] - b[i];
      r[i] = (limb)(s < 0 ? s + (int64_t)p_ : s);
    }
    return r;
  }

  Elem neg(int, const Elem& a) const {
    Elem r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] ? (limb)(p_ - a[i]) : 0;
    return r;
  }

  Elem mul(int lvl, const Elem& a, const Elem& b) const {
    Elem out(abs_degree(lvl));
    mul_into(lvl, a.data(), b.data(), out.data());
    return out;
  }

  Elem mul_small(int, const Elem& a, uint64_t c) const {
    c %= p_;
    Elem r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = (limb)((uint64_t)a[i] * c % p_);
    return r;
  }

  Elem inv(int lvl, const Elem& a) const {
    require(!is_zero(a), Err::DivisionByZero, "inverse of zero");
    if (lvl == 0) return Elem{(limb)modinv_u64(a[0], p_)};
    // xgcd of the chunk polynomial against the defining polynomial below.
    RawPoly ap = chunks(lvl, a);
    rp_strip(ap);
    RawPoly g, u, v;
    rp_xgcd(lvl - 1, ap, level(lvl).defining, g, u, v);
    require(rp_deg(g) == 0, Err::Internal, "inv: defining polynomial not irreducible?");
    // g is monic => g == 1, so u * a == 1 mod defining.
    return join(lvl, u);
  }

  Elem div(int lvl, const Elem& a, const Elem& b) const { return mul(lvl, a, inv(lvl, b)); }

  Elem pow(int lvl, Elem a, uint64_t e) const {
    Elem r = one(lvl);
    while (e) {
      if (e & 1) r = mul(lvl, r, a);
      a = mul(lvl, a, a);
      e >>= 1;
    }
    return r;
  }

  Elem pth_power(int lvl, const Elem& a) const { return pow(lvl, a, p_); }

  // a^(p^steps)
  Elem frob_p_power(int lvl, Elem a, uint64_t steps) const {
    uint64_t n = abs_degree(lvl);
    steps %= n;  // x -> x^(p^n) is the identity on this level
    for (uint64_t i = 0; i < steps; ++i) a = pth_power(lvl, a);
    return a;
  }

  // Unique p-th root (x -> x^p is a bijection).
  Elem pth_root(int lvl, const Elem& a) const { return frob_p_power(lvl, a, abs_degree(lvl) - 1); }

  // ---- embeddings along the chain -------------------------------------

  Elem embed_up(const Elem& a, int from, int to) const {
    require(from <= to, Err::LevelMismatch, "embed_up: source above target");
    Elem r(abs_degree(to), 0);
    std::memcpy(r.data(), a.data(), a.size() * sizeof(limb));
    return r;
  }

  std::optional<Elem> try_section(const Elem& a, int from, int to) const {
    require(to <= from, Err::LevelMismatch, "section: target above source");
    uint64_t n = abs_degree(to);
    for (size_t i = n; i < a.size(); ++i)
      if (a[i]) return std::nullopt;
    return Elem(a.begin(), a.begin() + (long)n);
  }

  Elem section(const Elem& a, int from, int to) const {
    auto r = try_section(a, from, to);
    require(r.has_value(), Err::NotInSubfield, "section: element not in subfield");
    return *r;
  }

  // ---- enumeration ------------------------------------------------------

  Elem index_to_elem(int lvl, uint64_t idx) const {
    Elem e(abs_degree(lvl));
    for (size_t i = 0; i < e.size(); ++i) {
      e[i] = (limb)(idx % p_);
      idx /= p_;
    }
    require(idx == 0, Err::TooLarge, "index_to_elem: index out of range");
    return e;
  }

  uint64_t elem_to_index(int lvl, const Elem& a) const {
    require(card_fits_u64(lvl), Err::TooLarge, "elem_to_index: level too large");
    uint64_t idx = 0;
    for (size_t i = a.size(); i-- > 0;) idx = idx * p_ + a[i];
    return idx;
  }

  // ---- raw dense polynomial kernels over level `lvl` -------------------

  static int rp_deg(const RawPoly& f) { return (int)f.size() - 1; }

  void rp_strip(RawPoly& f) const {
    while (!f.empty() && is_zero(f.back())) f.pop_back();
  }

  RawPoly rp_normalized(int, const RawPoly& f) const {
    RawPoly g = f;
    rp_strip(g);
    return g;
  }

  RawPoly rp_add(int lvl, const RawPoly& a, const RawPoly& b) const {
    RawPoly r(std::max(a.size(), b.size()), zero(lvl));
    for (size_t i = 0; i < r.size(); ++i) {
      if (i < a.size() && i < b.size())
        r[i] = add(lvl, a[i], b[i]);
      else if (i < a.size())
        r[i] = a[i];
      else
        r[i] = b[i];
    }
    rp_strip(r);
    return r;
  }

  RawPoly rp_sub(int lvl, const RawPoly& a, const RawPoly& b) const {
    RawPoly r(std::max(a.size(), b.size()), zero(lvl));
    for (size_t i = 0; i < r.size(); ++i) {
      Elem x = i < a.size() ? a[i] : zero(lvl);
      Elem y = i < b.size() ? b[i] : zero(lvl);
      r[i] = sub(lvl, x, y);
    }
    rp_strip(r);
    return r;
  }

  RawPoly rp_mul(int lvl, const RawPoly& a, const RawPoly& b) const {
    if (a.empty() || b.empty()) return {};
    RawPoly r(a.size() + b.size() - 1, zero(lvl));
    for (size_t i = 0; i < a.size(); ++i) {
      if (is_zero(a[i])) continue;
      for (size_t j = 0; j < b.size(); ++j) {
        if (is_zero(b[j])) continue;
        r[i + j] = add(lvl, r[i + j], mul(lvl, a[i], b[j]));
      }
    }
    rp_strip(r);
    return r;
  }

  RawPoly rp_scale(int lvl, const RawPoly& a, const Elem& c) const {
    if (is_zero(c)) return {};
    RawPoly r(a.size(), zero(lvl));
    for (size_t i = 0; i < a.size(); ++i) r[i] = mul(lvl, a[i], c);
    rp_strip(r);
    return r;
  }

  void rp_divrem(int lvl, const RawPoly& a, const RawPoly& b, RawPoly& q, RawPoly& r) const {
    require(!b.empty(), Err::DivisionByZero, "polynomial division by zero");
    r = a;
    rp_strip(r);
    q.clear();
    int db = rp_deg(b);
    if (rp_deg(r) < db) return;
    q.assign((size_t)(rp_deg(r) - db + 1), zero(lvl));
    Elem lcinv = inv(lvl, b.back());
    while (rp_deg(r) >= db) {
      int k = rp_deg(r) - db;
      Elem c = mul(lvl, r.back(), lcinv);
      q[(size_t)k] = c;
      for (int i = 0; i <= db; ++i) {
        r[(size_t)(k + i)] = sub(lvl, r[(size_t)(k + i)], mul(lvl, c, b[(size_t)i]));
      }
      rp_strip(r);
      if (r.empty()) break;
    }
    rp_strip(q);
  }

  RawPoly rp_mod(int lvl, const RawPoly& a, const RawPoly& b) const {
    RawPoly q, r;
    rp_divrem(lvl, a, b, q, r);
    return r;
  }

  // Makes f monic; returns the former leading coefficient.
  Elem rp_make_monic(int lvl, RawPoly& f) const {
    rp_strip(f);
    if (f.empty()) return zero(lvl);
    Elem lc = f.back();
    if (is_one(lvl, lc)) return lc;
    Elem ci = inv(lvl, lc);
    for (auto& c : f) c = mul(lvl, c, ci);
    return lc;
  }

  RawPoly rp_gcd(int lvl, RawPoly a, RawPoly b) const {
    rp_strip(a);
    rp_strip(b);
    while (!b.empty()) {
      RawPoly r = rp_mod(lvl, a, b);
      a = std::move(b);
      b = std::move(r);
    }
    rp_make_monic(lvl, a);
    return a;
  }

  // g = gcd(a,b) monic with u*a + v*b = g.
  void rp_xgcd(int lvl, RawPoly a, RawPoly b, RawPoly& g, RawPoly& u, RawPoly& v) const {
    rp_strip(a);
    rp_strip(b);
    RawPoly r0 = a, r1 = b;
    RawPoly s0{one(lvl)}, s1{};
    RawPoly t0{}, t1{one(lvl)};
    while (!r1.empty()) {
      RawPoly q, r;
      rp_divrem(lvl, r0, r1, q, r);
      RawPoly s2 = rp_sub(lvl, s0, rp_mul(lvl, q, s1));
      RawPoly t2 = rp_sub(lvl, t0, rp_mul(lvl, q, t1));
      r0 = std::move(r1);
      r1 = std::move(r);
      s0 = std::move(s1);
      s1 = std::move(s2);
      t0 = std::move(t1);
      t1 = std::move(t2);
    }
    g = std::move(r0);
    if (!g.empty() && !is_one(lvl, g.back())) {
      Elem ci = inv(lvl, g.back());
      for (auto& c : g) c = mul(lvl, c, ci);
      for (auto& c : s0) c = mul(lvl, c, ci);
      for (auto& c : t0) c = mul(lvl, c, ci);
    }
    u = std::move(s0);
    v = std::move(t0);
  }

  RawPoly rp_powmod(int lvl, RawPoly base, uint64_t e, const RawPoly& mod) const {
    base = rp_mod(lvl, base, mod);
    RawPoly r{one(lvl)};
    while (e) {
      if (e & 1) r = rp_mod(lvl, rp_mul(lvl, r, base), mod);
      base = rp_mod(lvl, rp_mul(lvl, base, base), mod);
      e >>= 1;
    }
    return r;
  }

  // f^(p^steps) mod m, via repeated small powers.
  RawPoly rp_p_power_iter_mod(int lvl, RawPoly f, uint64_t steps, const RawPoly& mod) const {
    f = rp_mod(lvl, f, mod);
    for (uint64_t i = 0; i < steps; ++i) f = rp_powmod(lvl, f, p_, mod);
    return f;
  }

  // x^((#level)^t) mod m.
  RawPoly rp_x_card_powmod(int lvl, uint64_t t, const RawPoly& mod) const {
    RawPoly x{zero(lvl), one(lvl)};
    return rp_p_power_iter_mod(lvl, x, abs_degree(lvl) * t, mod);
  }

  Elem rp_eval(int lvl, const RawPoly& f, const Elem& at) const {
    Elem acc = zero(lvl);
    for (size_t i = f.size(); i-- > 0;) {
      acc = mul(lvl, acc, at);
      acc = add(lvl, acc, f[i]);
    }
    return acc;
  }

  RawPoly rp_derivative(int lvl, const RawPoly& f) const {
    if (f.size() <= 1) return {};
    RawPoly r(f.size() - 1, zero(lvl));
    for (size_t i = 1; i < f.size(); ++i) r[i - 1] = mul_small(lvl, f[i], i);
    rp_strip(r);
    return r;
  }

  // Standard criterion: x^(#K^n) == x mod f and gcd(x^(#K^(n/r)) - x, f) == 1
  // for every prime r dividing n = deg f.
  bool rp_irreducible(int lvl, const RawPoly& fin) const {
    RawPoly f = rp_normalized(lvl, fin);
    int n = rp_deg(f);
    require(n >= 1, Err::ConstantPolynomial, "irreducibility of a constant");
    if (n == 1) return true;
    RawPoly x{zero(lvl), one(lvl)};
    RawPoly h = rp_x_card_powmod(lvl, (uint64_t)n, f);
    if (rp_sub(lvl, h, x) != RawPoly{}) return false;
    for (auto [r, k] : factor_u64((uint64_t)n)) {
      (void)k;
      RawPoly ht = rp_x_card_powmod(lvl, (uint64_t)n / r, f);
      RawPoly g = rp_gcd(lvl, rp_sub(lvl, ht, x), f);
      if (rp_deg(g) != 0) return false;
    }
    return true;
  }

  // ---- chunk views -------------------------------------------------------

  // Element of level lvl viewed as coefficients over level lvl-1 (length = degree).
  RawPoly chunks(int lvl, const Elem& a) const {
    require(lvl >= 1, Err::LevelMismatch, "chunks: prime field");
    uint64_t n = abs_degree(lvl - 1);
    uint32_t d = level(lvl).degree;
    RawPoly r(d);
    for (uint32_t j = 0; j < d; ++j)
      r[j] = Elem(a.begin() + (long)(j * n), a.begin() + (long)((j + 1) * n));
    return r;
  }

  Elem join(int lvl, const RawPoly& coeffs) const {
    uint64_t n = abs_degree(lvl - 1);
    uint32_t d = level(lvl).degree;
    require(coeffs.size() <= d, Err::Internal, "join: too many chunks");
    Elem a(abs_degree(lvl), 0);
    for (size_t j = 0; j < coeffs.size(); ++j)
      std::memcpy(a.data() + j * n, coeffs[j].data(), n * sizeof(limb));
    return a;
  }

 private:
  FieldTower() = default;

  static uint64_t next_uid() {
    static std::atomic<uint64_t> counter{1};
    return counter.fetch_add(1);
  }

  void mul_into(int lvl, const limb* a, const limb* b, limb* out) const {
    if (lvl == 0) {
      out[0] = (limb)((uint64_t)a[0] * b[0] % p_);
      return;
    }
    const Level& L = levels_[(size_t)lvl];
    uint32_t d = L.degree;
    uint64_t n = levels_[(size_t)lvl - 1].abs_deg;
    if (d == 1) {  // trivial extension
      mul_into(lvl - 1, a, b, out);
      return;
    }
    // chunked schoolbook convolution
    std::vector<limb> acc((2 * d - 1) * n, 0);
    std::vector<limb> tmp(n);
    for (uint32_t i = 0; i < d; ++i) {
      const limb* ai = a + i * n;
      bool ai_zero = true;
      for (uint64_t t = 0; t < n; ++t)
        if (ai[t]) {
          ai_zero = false;
          break;
        }
      if (ai_zero) continue;
      for (uint32_t j = 0; j < d; ++j) {
        mul_into(lvl - 1, ai, b + j * n, tmp.data());
        limb* dst = acc.data() + (i + j) * n;
        for (uint64_t t = 0; t < n; ++t) {
          uint64_t s = (uint64_t)dst[t] + tmp[t];
          dst[t] = (limb)(s >= p_ ? s - p_ : s);
        }
      }
    }
    // reduce chunks d .. 2d-2 by the monic defining polynomial
    for (uint32_t k = 2 * d - 2; k >= d && k < 2 * d; --k) {
      limb* ck = acc.data() + k * n;
      bool zero_chunk = true;
      for (uint64_t t = 0; t < n; ++t)
        if (ck[t]) {
          zero_chunk = false;
          break;
        }
      if (!zero_chunk) {
        for (uint32_t s = 0; s < d; ++s) {
          const Elem& fs = L.defining[s];
          mul_into(lvl - 1, ck, fs.data(), tmp.data());
          limb* dst = acc.data() + (k - d + s) * n;
          for (uint64_t t = 0; t < n; ++t) {
            int64_t v = (int64_t)dst[t] - tmp[t];
            dst[t] = (limb)(v < 0 ? v + (int64_t)p_ : v);
          }
        }
      }
    }
    std::memcpy(out, acc.data(), d * n * sizeof(limb));
  }

  uint64_t p_ = 2;
  std::vector<Level> levels_;
};

// ---------------------------------------------------------------------------
// Typed element with explicit tower/level, for the public API and the tests.
// ---------------------------------------------------------------------------

struct FieldElement {
  TowerPtr tower;
  int level = 0;
  Elem v;

  FieldElement() = default;
  FieldElement(TowerPtr t, int lvl, Elem val) : tower(std::move(t)), level(lvl), v(std::move(val)) {}

  bool is_zero() const { return tower->is_zero(v); }

  friend void check_same(const FieldElement& a, const FieldElement& b) {
    require(a.level == b.level && a.tower->compatible_at(*b.tower, a.level), Err::LevelMismatch,
            "field elements at different levels");
  }

  friend FieldElement operator+(const FieldElement& a, const FieldElement& b) {
    check_same(a, b);
    return {a.tower, a.level, a.tower->add(a.level, a.v, b.v)};
  }
  friend FieldElement operator-(const FieldElement& a, const FieldElement& b) {
    check_same(a, b);
    return {a.tower, a.level, a.tower->sub(a.level, a.v, b.v)};
  }
  friend FieldElement operator*(const FieldElement& a, const FieldElement& b) {
    check_same(a, b);
    return {a.tower, a.level, a.tower->mul(a.level, a.v, b.v)};
  }
  friend FieldElement operator/(const FieldElement& a, const FieldElement& b) {
    check_same(a, b);
    return {a.tower, a.level, a.tower->div(a.level, a.v, b.v)};
  }
  friend bool operator==(const FieldElement& a, const FieldElement& b) { return a.v == b.v; }
  friend bool operator!=(const FieldElement& a, const FieldElement& b) { return a.v != b.v; }

  FieldElement inverse() const { return {tower, level, tower->inv(level, v)}; }
  FieldElement pow(uint64_t e) const { return {tower, level, tower->pow(level, v, e)}; }
};

// a^((#base)^steps): the Galois action of Frobenius relative to base_level.
inline FieldElement frobenius(const FieldElement& a, int base_level, uint64_t steps) {
  require(base_level <= a.level, Err::LevelMismatch, "frobenius: base above element level");
  uint64_t nb = a.tower->abs_degree(base_level);
  uint64_t ext = a.tower->abs_degree(a.level) / nb;
  return {a.tower, a.level, a.tower->frob_p_power(a.level, a.v, nb * (steps % ext))};
}

inline FieldElement embed(const FieldElement& a, int target) {
  return {a.tower, target, a.tower->embed_up(a.v, a.level, target)};
}

inline FieldElement section(const FieldElement& a, int target) {
  return {a.tower, target, a.tower->section(a.v, a.level, target)};
}

inline FieldElement random_element(const TowerPtr& t, int lvl, Rng& rng) {
  Elem e(t->abs_degree(lvl));
  for (auto& x : e) x = (limb)rng.below(t->p());
  return {t, lvl, std::move(e)};
}

}  // namespace podlog
