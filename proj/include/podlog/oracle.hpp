#pragma once

// Independent brute-force oracles: Pohlig-Hellman + baby-step giant-step
// discrete logs, exhaustive pencil surveys (split counts via full
// factorization, not the gcd-based split test of the pipeline), the rational
// orbit check P(V) \ S = PGL2 * (x^q - x), pairwise coprimality of pencil
// members, and a splitting-field trap classifier.

#include <unordered_map>

#include "podlog/dlog.hpp"

namespace podlog {

// ---------------------------------------------------------------------------
// oracle_dlog: Pohlig-Hellman with per-digit BSGS. Exact, no descent code.
// ---------------------------------------------------------------------------

namespace detail {

struct PolyKeyHash {
  size_t operator()(const std::string& s) const { return std::hash<std::string>()(s); }
};

inline std::string poly_key(const Poly& f) {
  std::string s;
  for (auto& c : f.c)
    for (limb x : c) {
      s.append((const char*)&x, sizeof(limb));
    }
  return s;
}

// log_gamma(delta) in the order-n cyclic group generated by gamma, or
// nullopt; n is prime-power-free here (we call it with prime n).
inline std::optional<uint64_t> bsgs(const TargetField& F, const Poly& gamma, const Poly& delta,
                                    uint64_t n) {
  uint64_t m = 1;
  while (m * m < n) ++m;
  std::unordered_map<std::string, uint64_t, PolyKeyHash> table;
  table.reserve((size_t)m);
  Poly cur = F.one();
  for (uint64_t j = 0; j < m; ++j) {
    table.emplace(poly_key(cur), j);
    cur = F.mul(cur, gamma);
  }
  Poly giant = F.inv(F.pow(gamma, m));
  Poly y = F.reduce(delta);
  for (uint64_t i = 0; i <= m; ++i) {
    auto it = table.find(poly_key(y));
    if (it != table.end()) {
      uint64_t x = (i * m + it->second) % n;
      if (F.pow(gamma, x) == F.reduce(delta)) return x;
    }
    y = F.mul(y, giant);
  }
  return std::nullopt;
}

}  // namespace detail

inline uint64_t oracle_dlog(const DlogInstance& inst, uint64_t size_cap = (1ULL << 40)) {
  const FieldRepresentation& rep = *inst.rep;
  require(inst.N < size_cap, Err::TooLarge, "oracle_dlog: instance beyond the size cap");
  TargetField F(rep);
  uint64_t ord_g = element_order(F, inst.g, inst.N, inst.N_factors);
  uint64_t ord_h = element_order(F, inst.h, inst.N, inst.N_factors);
  require(ord_g % ord_h == 0, Err::NotInSubgroup, "oracle_dlog: h is not a power of g");
  uint64_t x = 0, xmod = 1;
  for (auto [r, k] : factor_u64(ord_g)) {
    uint64_t rk = 1;
    for (int i = 0; i < k; ++i) rk *= r;
    Poly gr = F.pow(inst.g, ord_g / rk);  // order r^k
    Poly hr = F.pow(inst.h, ord_g / rk);
    // digits of y = log_{gr}(hr) base r
    Poly base_r = F.pow(gr, rk / r);  // order r
    uint64_t y = 0, rpow = 1;
    Poly rem = hr;
    for (int i = 0; i < k; ++i) {
      Poly target = F.pow(rem, rk / (rpow * r));
      auto digit = detail::bsgs(F, base_r, target, r);
      require(digit.has_value(), Err::Internal, "oracle_dlog: BSGS digit not found");
      y += *digit * rpow;
      rem = F.mul(rem, F.inv(F.pow(gr, *digit * rpow)));
      rpow *= r;
    }
    uint64_t m2 = rk;
    uint64_t inv = modinv_u64(xmod % m2, m2);
    uint64_t diff = (y % m2 + m2 - x % m2) % m2;
    x = x + xmod * mulmod_u64(diff, inv, m2);
    xmod *= m2;
  }
  require(F.pow(inst.g, x % ord_g) == F.reduce(inst.h), Err::Internal,
          "oracle_dlog: verification failed");
  return x % ord_g;
}

// ---------------------------------------------------------------------------
// Exhaustive pencil survey.
// ---------------------------------------------------------------------------

struct SurveyReport {
  uint64_t pencil_size = 0;      // #K + 1
  uint64_t split_count = 0;      // members splitting completely over K
  uint64_t split_distinct = 0;   // ... with distinct roots and degree >= q
  uint64_t good_count = 0;       // ... passing the elimination predicate
  uint64_t trap_members = 0;     // split_distinct - good_count
  uint64_t degenerate_members = 0;  // N == 0 members
  std::optional<bool> bound_checked;  // split_count >= #K / (2 q^3), only when dm >= 23
};

struct SurveyOptions {
  uint64_t budget = 1ULL << 22;  // refuse pencils larger than this
  int threads = 1;
  bool check_bound = false;  // the dm >= 23 lower-bound assertion (slow)
};

// Enumerates the entire pencil. Split counting is independent of the
// pipeline's split test: it uses the full factorization route.
inline SurveyReport survey_split_fraction(const Poly& Q, const FieldRepresentation& rep,
                                          SurveyOptions opts = {}) {
  const TowerPtr& t = Q.tw;
  int lvl = Q.lvl;
  require(t->card_fits_u64(lvl) && t->card_u64(lvl) + 1 <= opts.budget, Err::TooLarge,
          "survey: pencil too large to enumerate");
  Pencil pencil = build_pencil(Q, rep);
  uint64_t n = t->card_u64(lvl) + 1;
  SurveyReport rep_out;
  rep_out.pencil_size = n;

  struct Tally {
    uint64_t split = 0, distinct = 0, good = 0, degen = 0;
  };
  unsigned nthreads = opts.threads > 1 ? (unsigned)opts.threads : 1;
  std::vector<Tally> tallies(nthreads);
  std::atomic<unsigned> slot{0};
  parallel_ranges(n, (int)nthreads, [&](uint64_t lo, uint64_t hi) {
    Tally& tl = tallies[slot.fetch_add(1)];
    for (uint64_t idx = lo; idx < hi; ++idx) {
      VQuad f = pencil.member_by_index(idx);
      if (f.is_zero()) continue;
      Poly N = phi_numerator(f, rep);
      if (N.is_zero()) {
        ++tl.degen;
        continue;
      }
      // Independent split test: full factorization of the expanded member.
      Poly F = expand_vquad(f, rep.q);
      auto fac = factorize(F, sub_seed(rep.seed, 0x5a11e7, idx));
      bool splits = true;
      bool distinct = F.deg() >= (int)rep.q;
      for (auto& [g, mult] : fac.factors) {
        if (g.deg() != 1) splits = false;
        if (mult != 1) distinct = false;
      }
      if (!splits) continue;
      ++tl.split;
      if (!distinct) continue;
      ++tl.distinct;
      // The elimination predicate (same code path as eliminate_quadratic).
      MemberTest mt = test_pencil_member(pencil, f, rep, sub_seed(rep.seed, 0x7e57e7, idx));
      if (mt.good) ++tl.good;
    }
  });
  for (auto& tl : tallies) {
    rep_out.split_count += tl.split;
    rep_out.split_distinct += tl.distinct;
    rep_out.good_count += tl.good;
    rep_out.degenerate_members += tl.degen;
  }
  rep_out.trap_members = rep_out.split_distinct - rep_out.good_count;
  if (opts.check_bound) {
    uint64_t dm = (uint64_t)rep.d * (t->abs_degree(lvl) / t->abs_degree(kLvlBase));
    if (dm >= 23) {
      uint64_t cardK = t->card_u64(lvl);
      rep_out.bound_checked = rep_out.split_count >= cardK / (2 * rep.q * rep.q * rep.q);
    }
  }
  return rep_out;
}

// ---------------------------------------------------------------------------
// Rational orbit lemma: over F = F_{q^j}, the members of P(V)(F) off S that
// split completely with distinct projective roots are exactly the PGL2(F)
// orbit of x^q - x.
// ---------------------------------------------------------------------------

struct OrbitReport {
  bool ok = false;
  uint64_t pv_points = 0;       // #P(V)(F)
  uint64_t pgl2_size = 0;       // #PGL2(F)
  uint64_t orbit_size = 0;      // distinct members of the orbit
  uint64_t off_s_split = 0;     // members off S splitting with distinct roots
};

inline OrbitReport verify_orbit_lemma(uint64_t q, uint32_t j, uint64_t seed = 1) {
  auto qf = factor_u64(q);
  require(qf.size() == 1, Err::NotPrime, "verify_orbit: q must be a prime power");
  require(checked_pow_u64(q, j).has_value() && checked_pow_u64(q, 4 * (uint64_t)j).has_value() &&
              *checked_pow_u64(q, j) <= 16,
          Err::TooLarge, "verify_orbit: q^j must be at most 16");
  uint64_t p = qf[0].first;
  uint32_t a = (uint32_t)qf[0].second;
  TowerPtr t = tower_build(p, {a, j}, seed);
  int lvl = kLvlBase;  // F_{q^j}
  uint64_t cardF = t->card_u64(lvl);

  OrbitReport out;
  // PGL2 orbit of x^q - x, canonically normalized.
  std::set<std::vector<limb>> orbit;
  VQuad xqx = make_vquad(t, lvl, t->zero(lvl), t->one(lvl), t->neg(lvl, t->one(lvl)), t->zero(lvl));
  auto vkey = [&](const VQuad& v) {
    VQuad nv = vquad_projective_normal(v);
    std::vector<limb> k;
    for (const Elem* e : {&nv.al, &nv.be, &nv.ga, &nv.de})
      k.insert(k.end(), e->begin(), e->end());
    return k;
  };
  // Enumerate projective matrices: first nonzero coordinate = 1.
  uint64_t count_pgl = 0;
  uint64_t total = cardF * cardF * cardF * cardF;
  for (uint64_t code = 0; code < total; ++code) {
    uint64_t x = code;
    Elem e[4];
    bool first_seen = false, canonical = true;
    for (int i = 0; i < 4; ++i) {
      e[i] = t->index_to_elem(lvl, x % cardF);
      x /= cardF;
      if (!first_seen && !t->is_zero(e[i])) {
        first_seen = true;
        if (!t->is_one(lvl, e[i])) canonical = false;
      }
    }
    if (!first_seen || !canonical) continue;
    Elem det = t->sub(lvl, t->mul(lvl, e[0], e[3]), t->mul(lvl, e[1], e[2]));
    if (t->is_zero(det)) continue;
    ++count_pgl;
    ProjMatrix g{t, lvl, e[0], e[1], e[2], e[3]};
    orbit.insert(vkey(star_action_vquad(g, xqx, q)));
  }
  out.pgl2_size = count_pgl;
  out.orbit_size = orbit.size();

  // Enumerate P(V)(F) and compare.
  bool ok = true;
  uint64_t pv = 0, off_split = 0;
  for (uint64_t code = 0; code < total; ++code) {
    uint64_t x = code;
    Elem e[4];
    bool first_seen = false, canonical = true;
    for (int i = 0; i < 4; ++i) {
      e[i] = t->index_to_elem(lvl, x % cardF);
      x /= cardF;
      if (!first_seen && !t->is_zero(e[i])) {
        first_seen = true;
        if (!t->is_one(lvl, e[i])) canonical = false;
      }
    }
    if (!first_seen || !canonical) continue;
    ++pv;
    VQuad v{t, lvl, e[0], e[1], e[2], e[3]};
    bool in_orbit = orbit.count(vkey(v)) > 0;
    bool off_s = !in_surface_S(v);
    Poly f = expand_vquad(v, q);
    bool splits_distinct = false;
    if (!f.is_zero() && f.deg() >= (int)q) {  // at most a simple root at infinity
      auto fac = factorize(f, sub_seed(seed, 0x02b17, code));
      splits_distinct = true;
      for (auto& [gg, mult] : fac.factors) {
        if (gg.deg() != 1 || mult != 1) splits_distinct = false;
      }
    }
    bool claim = off_s && splits_distinct;
    if (claim) ++off_split;
    if (claim != in_orbit) ok = false;
  }
  out.pv_points = pv;
  out.off_s_split = off_split;
  out.ok = ok && out.orbit_size == out.off_s_split;
  return out;
}

// ---------------------------------------------------------------------------
// Coprimality of pencil members: for good Q and distinct members f, g,
// gcd(f, g) = 1 and gcd(h1 phi(f), h1 phi(g)) = Q up to a scalar.
// ---------------------------------------------------------------------------

struct CoprimalityReport {
  bool ok = true;
  uint64_t pairs_checked = 0;
};

inline CoprimalityReport verify_coprimality(const Poly& Q, const FieldRepresentation& rep,
                                            uint64_t sample_pairs, uint64_t seed,
                                            uint64_t exhaustive_limit = 64) {
  TrapClass qc = classify_irreducible(Q, rep);
  require(!trap_class_is_trap(qc) && qc != TrapClass::H1SharedRoot, Err::TrapInput,
          "verify_coprimality: Q is not good");
  Pencil pencil = build_pencil(Q, rep);
  const TowerPtr& t = Q.tw;
  int lvl = Q.lvl;
  uint64_t n = t->card_fits_u64(lvl) ? t->card_u64(lvl) + 1 : UINT64_MAX;
  CoprimalityReport out;
  auto check_pair = [&](uint64_t i, uint64_t j) {
    VQuad fi = pencil.member_by_index(i);
    VQuad fj = pencil.member_by_index(j);
    Poly Fi = expand_vquad(fi, rep.q);
    Poly Fj = expand_vquad(fj, rep.q);
    if (!poly_gcd(Fi, Fj).is_one()) {
      out.ok = false;
      return;
    }
    Poly Ni = phi_numerator(fi, rep);  // = h1 * phi(f_i)
    Poly Nj = phi_numerator(fj, rep);
    if (Ni.is_zero() || Nj.is_zero()) return;  // degenerate members carry no content
    Poly gd = poly_gcd(Ni, Nj);
    if (!(gd == Q)) out.ok = false;  // both monic: "up to scalar" is equality
    ++out.pairs_checked;
  };
  if (n <= exhaustive_limit + 1) {
    for (uint64_t i = 0; i < n && out.ok; ++i)
      for (uint64_t j = i + 1; j < n && out.ok; ++j) check_pair(i, j);
  } else {
    Rng rng(sub_seed(seed, 0xc0b21));
    for (uint64_t s = 0; s < sample_pairs && out.ok; ++s) {
      uint64_t i = rng.below(n);
      uint64_t j = rng.below(n);
      if (i == j) continue;
      check_pair(i, j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splitting-field trap oracle: adjoin an explicit root of the minimal
// polynomial and evaluate the three trap conditions by field arithmetic on
// every root. Used to cross-check classify_irreducible on small inputs.
// ---------------------------------------------------------------------------

inline TrapClass classify_oracle(const Poly& P, const FieldRepresentation& rep) {
  require(P.deg() >= 1, Err::ConstantPolynomial, "classify_oracle: constant polynomial");
  Poly M = root_minpoly_over_base(P, rep);
  const TowerPtr& t = rep.tower;
  uint64_t m2 = (uint64_t)M.deg();
  TowerPtr L = M.deg() == 1 ? t : t->extend(M.c);
  int lvl = M.deg() == 1 ? kLvlBase : L->top_level();
  // Collect every root of M in L by direct search through the Frobenius orbit.
  Elem tau0 = M.deg() == 1 ? t->neg(kLvlBase, M.coeff(0)) : L->gen(lvl);
  std::vector<Elem> roots{tau0};
  for (uint64_t i = 1; i < m2; ++i)
    roots.push_back(L->frob_p_power(lvl, roots.back(), L->abs_degree(kLvlBase)));
  Poly h0L = rep.h0.lift_to(L, lvl);
  Poly h1L = rep.h1.lift_to(L, lvl);
  Poly ML = M.lift_to(L, lvl);
  std::optional<TrapClass> agreed;
  for (const Elem& tau : roots) {
    require(L->is_zero(ML.eval(tau)), Err::Internal, "classify_oracle: not a root");
    TrapClass c;
    Elem h1v = h1L.eval(tau);
    if (L->is_zero(h1v)) {
      c = TrapClass::H1SharedRoot;
    } else if (m2 % 2 == 1) {
      c = TrapClass::OddDegree;
    } else {
      uint64_t m = m2 / 2;
      Elem h0v = h0L.eval(tau);
      Elem tq = L->frob_p_power(lvl, tau, rep.a);  // tau^q by actual powering
      if (L->sub(lvl, L->mul(lvl, h1v, tq), h0v) == L->zero(lvl)) {
        c = TrapClass::Level0;
      } else {
        Elem ttop = L->frob_p_power(lvl, tau, rep.a * ((uint64_t)rep.d * m + 1));
        if (L->sub(lvl, L->mul(lvl, h1v, ttop), h0v) == L->zero(lvl)) {
          c = TrapClass::LevelDM;
        } else {
          Elem w = L->div(lvl, h0v, h1v);
          Elem wf = L->frob_p_power(lvl, w, rep.a * (uint64_t)rep.d * m);
          c = (wf == w) ? TrapClass::Degenerate : TrapClass::Good;
        }
      }
    }
    if (agreed && *agreed != c)
      fail(Err::Internal, "classify_oracle: roots disagree (classification not Galois stable)");
    agreed = c;
  }
  return *agreed;
}

}  // namespace podlog
