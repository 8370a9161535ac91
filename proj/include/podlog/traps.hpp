#pragma once

// Trap classification. A root tau whose degree over F_{q^d} is an even
// number 2m (and h1(tau) != 0) is a degenerate trap root if (h0/h1)(tau)
// lies in F_{q^(dm)}, a level-0 trap root if h1(tau)*tau^q = h0(tau), and a
// level-dm trap root if h1(tau)*tau^(q^(dm+1)) = h0(tau). All tests run in
// the quotient ring F_{q^d}[y]/(minpoly) via iterated q-power maps; no
// splitting field is ever constructed here.

#include "podlog/fieldrep.hpp"

namespace podlog {

enum class TrapClass {
  Good,
  Degenerate,
  Level0,
  LevelDM,
  H1SharedRoot,
  OddDegree,  // good by definition: trap conditions need even degree
};

inline const char* trap_class_name(TrapClass c) {
  switch (c) {
    case TrapClass::Good: return "good";
    case TrapClass::Degenerate: return "degenerate-trap";
    case TrapClass::Level0: return "level-0-trap";
    case TrapClass::LevelDM: return "level-dm-trap";
    case TrapClass::H1SharedRoot: return "h1-shared-root";
    case TrapClass::OddDegree: return "odd-degree";
  }
  return "?";
}

inline bool trap_class_is_trap(TrapClass c) {
  return c == TrapClass::Degenerate || c == TrapClass::Level0 || c == TrapClass::LevelDM;
}

// Minimal polynomial over F_{q^d} of a root of P (P irreducible over a level
// K containing the base). The conjugate norm of P down to the base is a
// power of a single irreducible.
inline Poly root_minpoly_over_base(const Poly& P, const FieldRepresentation& rep) {
  if (P.lvl == kLvlBase) return P.make_monic().first;
  if (P.deg() == 1) {
    Elem root = P.tw->neg(P.lvl, P.tw->div(P.lvl, P.coeff(0), P.coeff(1)));
    return minimal_polynomial(FieldElement{P.tw, P.lvl, root}, kLvlBase);
  }
  Poly nrm = conjugate_norm(P.make_monic().first, kLvlBase);
  auto fac = factorize(nrm, sub_seed(rep.seed, 0x717a95));
  require(fac.factors.size() == 1, Err::NotIrreducible,
          "root_minpoly: input was not irreducible over its level");
  return fac.factors.front().first;
}

inline TrapClass classify_irreducible(const Poly& P, const FieldRepresentation& rep) {
  require(P.deg() >= 1, Err::ConstantPolynomial, "classify: constant polynomial");
  require(P.tw->compatible_at(*rep.tower, kLvlBase) && P.lvl >= kLvlBase, Err::LevelMismatch,
          "classify: polynomial must live over a level containing F_{q^d}");
  Poly M = root_minpoly_over_base(P, rep);
  const TowerPtr& t = rep.tower;
  uint64_t m2 = (uint64_t)M.deg();  // [F_{q^d}(tau) : F_{q^d}]
  // Work in R = F_{q^d}[y]/(M) with tau = y.
  Poly h1m = rep.h1 % M;
  if (h1m.is_zero()) return TrapClass::H1SharedRoot;
  if (m2 % 2 == 1) return TrapClass::OddDegree;
  uint64_t m = m2 / 2;
  Poly h0m = rep.h0 % M;
  uint64_t qsteps = rep.a;  // one q-power = a p-powers
  Poly y = Poly::x(t, kLvlBase) % M;
  // level 0: h1(tau) tau^q - h0(tau) = 0
  Poly yq = poly_p_power_iter_mod(y, qsteps, M);
  if (((h1m * yq) % M - h0m % M).is_zero()) return TrapClass::Level0;
  // level dm: h1(tau) tau^(q^(dm+1)) - h0(tau) = 0
  Poly ytop = poly_p_power_iter_mod(y, qsteps * ((uint64_t)rep.d * m + 1), M);
  if (((h1m * ytop) % M - h0m % M).is_zero()) return TrapClass::LevelDM;
  // degenerate: (h0/h1)(tau) fixed by Frobenius^(dm)
  auto xg = poly_xgcd(h1m, M);
  require(xg.g.is_one(), Err::Internal, "classify: h1 not invertible mod minpoly");
  Poly w = (h0m * xg.u) % M;
  Poly wfix = poly_p_power_iter_mod(w, qsteps * (uint64_t)rep.d * m, M);
  if (wfix == w) return TrapClass::Degenerate;
  return TrapClass::Good;
}

struct GoodnessReport {
  bool good = true;        // no Degenerate / Level0 / LevelDM factor
  bool h1_shared = false;  // some factor divides h1 (reported separately)
  std::vector<std::pair<Poly, TrapClass>> factors;

  // What elimination may actually consume.
  bool usable() const { return good && !h1_shared; }
};

inline GoodnessReport is_good_polynomial(const Poly& f, const FieldRepresentation& rep) {
  require(!f.is_zero(), Err::ZeroPolynomial, "is_good_polynomial: zero polynomial");
  GoodnessReport rep_out;
  if (f.deg() == 0) return rep_out;
  auto fac = factorize(f, sub_seed(rep.seed, 0x900d));
  for (auto& [g, mult] : fac.factors) {
    (void)mult;
    TrapClass c = classify_irreducible(g, rep);
    rep_out.factors.push_back({g, c});
    if (trap_class_is_trap(c)) rep_out.good = false;
    if (c == TrapClass::H1SharedRoot) rep_out.h1_shared = true;
  }
  return rep_out;
}

}  // namespace podlog
