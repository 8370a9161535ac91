#pragma once

// The field representation (q, d, h0, h1, I): coprime h0, h1 of degree at
// most two over F_{q^d} and a monic irreducible degree-ell factor I of
// h1*x^q - h0, presenting F_{q^(d*ell)} as F_{q^d}[x]/(I) with the
// substitution x^q -> h0/h1 available modulo I.

#include "podlog/factor.hpp"

namespace podlog {

// Tower level indices used by every representation.
inline constexpr int kLvlPrime = 0;  // F_p
inline constexpr int kLvlQ = 1;      // F_q
inline constexpr int kLvlBase = 2;   // F_{q^d}

struct FieldRepresentation {
  TowerPtr tower;  // F_p ⊂ F_q ⊂ F_{q^d}
  uint64_t q = 0;  // cardinality of level 1 (prime power p^a)
  uint32_t a = 1;  // q = p^a
  uint32_t d = 1;
  uint32_t ell = 0;
  Poly h0, h1, I;  // over level kLvlBase; I monic irreducible of degree ell
  uint64_t seed = 0;

  uint64_t p() const { return tower->p(); }
  uint64_t base_card() const { return tower->card_u64(kLvlBase); }

  // h1 * x^q - h0 over the base level.
  Poly bracket_poly() const {
    Poly xq = Poly::monomial(tower, kLvlBase, (size_t)q, tower->one(kLvlBase));
    return h1 * xq - h0;
  }

  // Group order q^(d*ell) - 1; TooLarge beyond 2^62.
  uint64_t group_order() const {
    auto c = checked_pow_u64(q, (uint64_t)d * ell);
    require(c.has_value() && *c <= (1ULL << 62), Err::TooLarge,
            "group order exceeds the 2^62 desk-scale cap");
    return *c - 1;
  }
};

struct CheckLine {
  std::string name;
  bool ok;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckLine> checks;
  bool all_ok = true;

  void add(const std::string& name, bool ok, const std::string& detail = "") {
    checks.push_back({name, ok, detail});
    all_ok = all_ok && ok;
  }
};

inline ValidationReport validate_representation(const FieldRepresentation& rep) {
  ValidationReport r;
  const TowerPtr& t = rep.tower;
  r.add("q_matches_tower", t->card_fits_u64(kLvlQ) && t->card_u64(kLvlQ) == rep.q);
  r.add("d_matches_tower", t->level(kLvlBase).degree == rep.d);
  r.add("h0_degree", !rep.h0.is_zero() && rep.h0.deg() <= 2);
  r.add("h1_degree", !rep.h1.is_zero() && rep.h1.deg() <= 2);
  bool copr = false;
  if (!rep.h0.is_zero() && !rep.h1.is_zero()) copr = poly_gcd(rep.h0, rep.h1).is_one();
  r.add("h0_h1_coprime", copr);
  r.add("I_monic", rep.I.monic());
  r.add("I_degree", rep.I.deg() == (int)rep.ell && rep.ell >= 2);
  bool irr = rep.I.deg() >= 1 && is_irreducible(rep.I);
  r.add("I_irreducible", irr);
  bool divides = false;
  if (!rep.I.is_zero() && rep.I.deg() >= 1) divides = (rep.bracket_poly() % rep.I).is_zero();
  r.add("I_divides_h1xq_minus_h0", divides);
  bool icop = !rep.I.is_zero() && !rep.h1.is_zero() && poly_gcd(rep.I, rep.h1).is_one();
  r.add("I_h1_coprime", icop);
  if (r.all_ok) {
    // x^q == h0/h1 mod I, the substitution the whole algorithm rests on.
    Poly xq = poly_powmod(Poly::x(t, kLvlBase), rep.q, rep.I);
    auto xg = poly_xgcd(rep.h1, rep.I);
    Poly h1inv = xg.u % rep.I;
    Poly rhs = (rep.h0 * h1inv) % rep.I;
    r.add("xq_equals_h0_over_h1_mod_I", xq == rhs);
  }
  return r;
}

// Constructs a representation from parts, enforcing every invariant.
inline FieldRepresentation make_representation(TowerPtr tower, uint64_t q, uint32_t a, uint32_t d,
                                               Poly h0, Poly h1, Poly I, uint64_t seed) {
  FieldRepresentation rep;
  rep.tower = std::move(tower);
  rep.q = q;
  rep.a = a;
  rep.d = d;
  rep.ell = (uint32_t)std::max(I.deg(), 0);
  rep.h0 = std::move(h0);
  rep.h1 = std::move(h1);
  rep.I = std::move(I);
  rep.seed = seed;
  auto report = validate_representation(rep);
  if (!report.all_ok) {
    std::string bad;
    for (auto& c : report.checks)
      if (!c.ok) bad += (bad.empty() ? "" : ", ") + c.name;
    fail(Err::NotIrreducible, "representation invalid: " + bad);
  }
  return rep;
}

// Random search: h1 monic of degree 0/1/2 with equal probability, h0 free of
// degree <= 2; keep the first irreducible factor of h1*x^q - h0 whose degree
// lies in [ell_lo, ell_hi] under the canonical factor order.
inline FieldRepresentation search_representation(uint64_t q, uint32_t d, uint32_t ell_lo,
                                                 uint32_t ell_hi, uint64_t seed,
                                                 uint64_t max_trials = 10000) {
  require(q >= 2, Err::NotPrime, "search: q must be a prime power >= 2");
  auto qfact = factor_u64(q);
  require(qfact.size() == 1, Err::NotPrime, "search: q must be a prime power");
  uint64_t p = qfact[0].first;
  uint32_t a = (uint32_t)qfact[0].second;
  require(ell_lo >= 2 && ell_lo <= ell_hi, Err::SearchExhausted,
          "search: ell range must sit inside [2, q+2]");
  require(ell_hi <= q + 2, Err::SearchExhausted,
          "search: ell exceeds deg(h1*x^q - h0) <= q+2, no representation can exist");
  TowerPtr tower = tower_build(p, {a, d}, seed);
  Rng rng(sub_seed(seed, 0x5ea9c4));
  for (uint64_t trial = 0; trial < max_trials; ++trial) {
    int dh1 = (int)rng.below(3);
    Poly h1 = random_monic(tower, kLvlBase, dh1, rng);
    Poly h0 = random_poly_below(tower, kLvlBase, 3, rng);
    if (h0.is_zero()) continue;
    if (!poly_gcd(h0, h1).is_one()) continue;
    Poly xq = Poly::monomial(tower, kLvlBase, (size_t)q, tower->one(kLvlBase));
    Poly bracket = h1 * xq - h0;
    if (bracket.deg() < (int)ell_lo) continue;
    auto fac = factorize(bracket, sub_seed(seed, 0xfa, trial));
    for (auto& [g, mult] : fac.factors) {
      (void)mult;
      if (g.deg() < (int)ell_lo || g.deg() > (int)ell_hi) continue;
      if (!poly_gcd(g, h1).is_one()) continue;  // needed so h1 is a unit mod I
      return make_representation(tower, q, a, d, h0, h1, g, seed);
    }
  }
  fail(Err::SearchExhausted,
       "search: no representation found in " + std::to_string(max_trials) + " trials");
}

// Base change to F_{q^d'} (d | d'): I may factor; I' is the canonical least
// irreducible factor over the larger base, of degree ell / gcd(ell, d'/d).
inline FieldRepresentation extend_base(const FieldRepresentation& rep, uint32_t d_prime) {
  require(d_prime >= 1 && d_prime % rep.d == 0, Err::LevelMismatch,
          "extend_base: d must divide d'");
  if (d_prime == rep.d) return rep;
  uint64_t seed2 = sub_seed(rep.seed, 0xd9, d_prime);
  // New chain sharing F_p ⊂ F_q, with a fresh degree-d' level.
  TowerPtr big = rep.tower;
  {
    TowerPtr fq_chain = FieldTower::prime_field(rep.tower->p());
    fq_chain = fq_chain->extend(rep.tower->level(kLvlQ).defining);
    Rng rng(seed2);
    Poly f = random_irreducible(fq_chain, kLvlQ, (int)d_prime, rng);
    big = fq_chain->extend(f.c);
  }
  auto emb = FieldEmbedding::build(rep.tower, kLvlBase, big, kLvlBase, kLvlQ);
  Poly h0b = emb.apply(rep.h0);
  Poly h1b = emb.apply(rep.h1);
  Poly Ib = emb.apply(rep.I);
  auto fac = factorize(Ib, seed2);
  require(!fac.factors.empty(), Err::Internal, "extend_base: empty factorization");
  Poly Iprime = fac.factors.front().first;
  return make_representation(big, rep.q, rep.a, d_prime, h0b, h1b, Iprime, seed2);
}

// ---------------------------------------------------------------------------
// The target field F_{q^d}[x]/(I). Elements are polynomials of degree < ell.
// ---------------------------------------------------------------------------

struct TargetField {
  const FieldRepresentation* rep;

  explicit TargetField(const FieldRepresentation& r) : rep(&r) {}

  Poly reduce(const Poly& f) const { return f % rep->I; }
  Poly one() const { return Poly::one(rep->tower, kLvlBase); }
  Poly zero() const { return Poly::zero(rep->tower, kLvlBase); }

  Poly mul(const Poly& x, const Poly& y) const { return (x * y) % rep->I; }

  Poly inv(const Poly& x) const {
    require(!x.is_zero(), Err::DivisionByZero, "target field: inverse of zero");
    auto xg = poly_xgcd(x % rep->I, rep->I);
    require(xg.g.is_one(), Err::Internal, "target field: I not irreducible?");
    return xg.u % rep->I;
  }

  Poly pow(const Poly& x, uint64_t e) const { return poly_powmod(x, e, rep->I); }

  // Signed exponent, reduced modulo the group order.
  Poly pow_signed(const Poly& x, int64_t e) const {
    uint64_t n = rep->group_order();
    uint64_t ue = e >= 0 ? (uint64_t)e % n : n - ((uint64_t)(-e) % n);
    if (ue == 0) return one();
    return pow(x % rep->I, ue);
  }

  uint64_t element_count() const {
    auto c = checked_pow_u64(rep->q, (uint64_t)rep->d * rep->ell);
    require(c.has_value(), Err::TooLarge, "target field too large to enumerate");
    return *c;
  }

  // Mixed-radix bijection [0, q^(d*ell)) <-> elements.
  Poly element_from_index(uint64_t idx) const {
    uint64_t bc = rep->base_card();
    RawPoly c;
    for (uint32_t i = 0; i < rep->ell; ++i) {
      c.push_back(rep->tower->index_to_elem(kLvlBase, idx % bc));
      idx /= bc;
    }
    require(idx == 0, Err::TooLarge, "element index out of range");
    return Poly(rep->tower, kLvlBase, std::move(c));
  }

  uint64_t index_of(const Poly& x) const {
    uint64_t bc = rep->base_card();
    uint64_t idx = 0;
    for (size_t i = (size_t)rep->ell; i-- > 0;)
      idx = idx * bc + rep->tower->elem_to_index(kLvlBase, x.coeff(i));
    return idx;
  }
};

// Multiplicative order from the factored group order.
inline uint64_t element_order(const TargetField& F, const Poly& x, uint64_t n,
                              const std::vector<std::pair<uint64_t, int>>& n_factors) {
  require(!x.is_zero(), Err::DivisionByZero, "order of zero");
  uint64_t o = n;
  for (auto [r, k] : n_factors) {
    for (int i = 0; i < k; ++i) {
      if (o % r == 0 && F.pow(x, o / r).is_one())
        o /= r;
      else
        break;
    }
  }
  return o;
}

}  // namespace podlog
