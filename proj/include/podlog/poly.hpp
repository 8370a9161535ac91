#pragma once

// Dense univariate polynomials over a tower level. Thin typed wrapper around
// the raw kernels in tower.hpp; zero polynomial has an empty coefficient
// sequence and no trailing zeros are kept.

#include "podlog/tower.hpp"

namespace podlog {

struct Poly {
  TowerPtr tw;
  int lvl = 0;
  RawPoly c;  // canonical (stripped)

  Poly() = default;
  Poly(TowerPtr t, int level, RawPoly coeffs) : tw(std::move(t)), lvl(level), c(std::move(coeffs)) {
    tw->rp_strip(c);
  }

  static Poly zero(const TowerPtr& t, int lvl) { return Poly(t, lvl, {}); }
  static Poly one(const TowerPtr& t, int lvl) { return Poly(t, lvl, {t->one(lvl)}); }
  static Poly constant(const TowerPtr& t, int lvl, Elem e) { return Poly(t, lvl, {std::move(e)}); }
  static Poly x(const TowerPtr& t, int lvl) { return Poly(t, lvl, {t->zero(lvl), t->one(lvl)}); }

  static Poly monomial(const TowerPtr& t, int lvl, size_t k, const Elem& coeff) {
    RawPoly r(k + 1, t->zero(lvl));
    r[k] = coeff;
    return Poly(t, lvl, std::move(r));
  }

  // x - a
  static Poly linear_root(const TowerPtr& t, int lvl, const Elem& a) {
    return Poly(t, lvl, {t->neg(lvl, a), t->one(lvl)});
  }

  int deg() const { return (int)c.size() - 1; }
  bool is_zero() const { return c.empty(); }
  bool is_one() const { return c.size() == 1 && tw->is_one(lvl, c[0]); }

  Elem coeff(size_t i) const { return i < c.size() ? c[i] : tw->zero(lvl); }
  Elem lc() const {
    require(!c.empty(), Err::ZeroPolynomial, "leading coefficient of zero");
    return c.back();
  }
  bool monic() const { return !c.empty() && tw->is_one(lvl, c.back()); }

  friend void check_same(const Poly& a, const Poly& b) {
    require(a.lvl == b.lvl && a.tw->compatible_at(*b.tw, a.lvl), Err::LevelMismatch,
            "polynomials over different levels");
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    check_same(a, b);
    return Poly(a.tw, a.lvl, a.tw->rp_add(a.lvl, a.c, b.c));
  }
  friend Poly operator-(const Poly& a, const Poly& b) {
    check_same(a, b);
    return Poly(a.tw, a.lvl, a.tw->rp_sub(a.lvl, a.c, b.c));
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    check_same(a, b);
    return Poly(a.tw, a.lvl, a.tw->rp_mul(a.lvl, a.c, b.c));
  }
  friend bool operator==(const Poly& a, const Poly& b) { return a.lvl == b.lvl && a.c == b.c; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  Poly scaled(const Elem& s) const { return Poly(tw, lvl, tw->rp_scale(lvl, c, s)); }

  std::pair<Poly, Poly> divrem(const Poly& b) const {
    check_same(*this, b);
    RawPoly q, r;
    tw->rp_divrem(lvl, c, b.c, q, r);
    return {Poly(tw, lvl, std::move(q)), Poly(tw, lvl, std::move(r))};
  }

  Poly operator%(const Poly& b) const { return divrem(b).second; }
  Poly operator/(const Poly& b) const { return divrem(b).first; }

  Elem eval(const Elem& at) const { return tw->rp_eval(lvl, c, at); }

  FieldElement eval_fe(const FieldElement& at) const {
    require(at.level == lvl, Err::LevelMismatch, "eval: wrong level");
    return {tw, lvl, eval(at.v)};
  }

  Poly derivative() const { return Poly(tw, lvl, tw->rp_derivative(lvl, c)); }

  // (monic, former leading coefficient)
  std::pair<Poly, Elem> make_monic() const {
    RawPoly f = c;
    Elem u = tw->rp_make_monic(lvl, f);
    return {Poly(tw, lvl, std::move(f)), u};
  }

  // Coefficient-wise embedding to a higher level of the same chain.
  Poly lift_to(const TowerPtr& t, int target) const {
    require(t->compatible_at(*tw, lvl), Err::LevelMismatch, "lift_to: incompatible towers");
    RawPoly r(c.size());
    for (size_t i = 0; i < c.size(); ++i) r[i] = t->embed_up(c[i], lvl, target);
    return Poly(t, target, std::move(r));
  }

  // Coefficient-wise section down (NotInSubfield if any coefficient escapes).
  Poly section_to(int target) const {
    RawPoly r(c.size());
    for (size_t i = 0; i < c.size(); ++i) r[i] = tw->section(c[i], lvl, target);
    return Poly(tw, target, std::move(r));
  }

  // coefficient-wise a -> a^((#base)^steps)
  Poly coeff_frobenius(int base_level, uint64_t steps) const {
    uint64_t nb = tw->abs_degree(base_level);
    uint64_t ext = tw->abs_degree(lvl) / nb;
    uint64_t psteps = nb * (steps % ext);
    RawPoly r(c.size());
    for (size_t i = 0; i < c.size(); ++i) r[i] = tw->frob_p_power(lvl, c[i], psteps);
    return Poly(tw, lvl, std::move(r));
  }
};

// Canonical order: by degree, then coefficients from the top down.
inline bool poly_less(const Poly& a, const Poly& b) {
  if (a.deg() != b.deg()) return a.deg() < b.deg();
  for (size_t i = a.c.size(); i-- > 0;) {
    if (a.c[i] != b.c[i]) return FieldTower::elem_less(a.c[i], b.c[i]);
  }
  return false;
}

// Monic gcd; gcd(f, 0) = monic f.
inline Poly poly_gcd(const Poly& f, const Poly& g) {
  check_same(f, g);
  return Poly(f.tw, f.lvl, f.tw->rp_gcd(f.lvl, f.c, g.c));
}

struct XgcdResult {
  Poly g, u, v;  // u*f + v*g_in = g, g monic (or zero)
};

inline XgcdResult poly_xgcd(const Poly& f, const Poly& g) {
  check_same(f, g);
  RawPoly gg, u, v;
  f.tw->rp_xgcd(f.lvl, f.c, g.c, gg, u, v);
  return {Poly(f.tw, f.lvl, std::move(gg)), Poly(f.tw, f.lvl, std::move(u)),
          Poly(f.tw, f.lvl, std::move(v))};
}

inline Poly poly_powmod(const Poly& base, uint64_t e, const Poly& mod) {
  return Poly(base.tw, base.lvl, base.tw->rp_powmod(base.lvl, base.c, e, mod.c));
}

// f^(p^steps) mod m
inline Poly poly_p_power_iter_mod(const Poly& f, uint64_t steps, const Poly& mod) {
  return Poly(f.tw, f.lvl, f.tw->rp_p_power_iter_mod(f.lvl, f.c, steps, mod.c));
}

// x^((#level)^t) mod m
inline Poly poly_x_card_powmod(const Poly& mod, uint64_t t = 1) {
  return Poly(mod.tw, mod.lvl, mod.tw->rp_x_card_powmod(mod.lvl, t, mod.c));
}

inline Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& mod) {
  return (a * b) % mod;
}

inline Poly random_monic(const TowerPtr& t, int lvl, int degree, Rng& rng) {
  RawPoly r((size_t)degree + 1);
  for (int i = 0; i < degree; ++i) {
    Elem e(t->abs_degree(lvl));
    for (auto& x : e) x = (limb)rng.below(t->p());
    r[(size_t)i] = std::move(e);
  }
  r[(size_t)degree] = t->one(lvl);
  return Poly(t, lvl, std::move(r));
}

inline Poly random_poly_below(const TowerPtr& t, int lvl, int degree_bound, Rng& rng) {
  RawPoly r((size_t)degree_bound);
  for (int i = 0; i < degree_bound; ++i) {
    Elem e(t->abs_degree(lvl));
    for (auto& x : e) x = (limb)rng.below(t->p());
    r[(size_t)i] = std::move(e);
  }
  return Poly(t, lvl, std::move(r));
}

}  // namespace podlog
