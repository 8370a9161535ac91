#pragma once

// The geometry behind degree-two elimination: the 4-dimensional space V
// spanned by x^(q+1), x^q, x, 1, the star action of 2x2 matrices, the
// surface S = psi(P^1 x P^1), the substitution map phi with numerator
// alpha*x*h0 + beta*h0 + gamma*x*h1 + delta*h1, the pencil P^1_Q = P(ker
// phi_Q) with its canonical basis, and the special points s1, s2 with their
// roots a1, a2, b1, b2 in the quadratic extension K[y]/(Q).

#include <array>

#include "podlog/fieldrep.hpp"

namespace podlog {

// A point of P^1(K): finite element or infinity.
struct P1Point {
  bool inf = false;
  Elem v;

  static P1Point infinity() { return {true, {}}; }
  static P1Point finite(Elem e) { return {false, std::move(e)}; }

  friend bool operator==(const P1Point& a, const P1Point& b) {
    if (a.inf != b.inf) return false;
    return a.inf || a.v == b.v;
  }
};

// alpha*x^(q+1) + beta*x^q + gamma*x + delta over some level; projective
// where noted by callers.
struct VQuad {
  TowerPtr tw;
  int lvl = 0;
  Elem al, be, ga, de;

  bool is_zero() const {
    return tw->is_zero(al) && tw->is_zero(be) && tw->is_zero(ga) && tw->is_zero(de);
  }

  VQuad lift_to(const TowerPtr& t, int target) const {
    return {t, target, t->embed_up(al, lvl, target), t->embed_up(be, lvl, target),
            t->embed_up(ga, lvl, target), t->embed_up(de, lvl, target)};
  }

  friend bool operator==(const VQuad& x, const VQuad& y) {
    return x.al == y.al && x.be == y.be && x.ga == y.ga && x.de == y.de;
  }
};

inline VQuad make_vquad(const TowerPtr& t, int lvl, Elem al, Elem be, Elem ga, Elem de) {
  VQuad v{t, lvl, std::move(al), std::move(be), std::move(ga), std::move(de)};
  require(!v.is_zero(), Err::ZeroPolynomial, "VQuad: all four coefficients vanish");
  return v;
}

// Canonical projective form: first nonzero coordinate scaled to 1 (order
// alpha, beta, gamma, delta).
inline VQuad vquad_projective_normal(const VQuad& v) {
  const TowerPtr& t = v.tw;
  Elem coords[4] = {v.al, v.be, v.ga, v.de};
  for (auto& c : coords) {
    if (!t->is_zero(c)) {
      Elem ci = t->inv(v.lvl, c);
      return {t, v.lvl, t->mul(v.lvl, v.al, ci), t->mul(v.lvl, v.be, ci),
              t->mul(v.lvl, v.ga, ci), t->mul(v.lvl, v.de, ci)};
    }
  }
  fail(Err::ZeroPolynomial, "normalizing zero VQuad");
}

inline Poly expand_vquad(const VQuad& v, uint64_t q) {
  RawPoly c((size_t)q + 2, v.tw->zero(v.lvl));
  c[0] = v.de;
  c[1] = v.ga;
  c[(size_t)q] = v.tw->add(v.lvl, c[(size_t)q], v.be);
  c[(size_t)q + 1] = v.tw->add(v.lvl, c[(size_t)q + 1], v.al);
  return Poly(v.tw, v.lvl, std::move(c));
}

// Invertible 2x2 matrix, projective.
struct ProjMatrix {
  TowerPtr tw;
  int lvl = 0;
  Elem a, b, c, d;

  Elem det() const {
    return tw->sub(lvl, tw->mul(lvl, a, d), tw->mul(lvl, b, c));
  }
};

inline ProjMatrix make_proj_matrix(const TowerPtr& t, int lvl, Elem a, Elem b, Elem c, Elem d) {
  ProjMatrix g{t, lvl, std::move(a), std::move(b), std::move(c), std::move(d)};
  require(!t->is_zero(g.det()), Err::Internal, "singular 2x2 matrix");
  return g;
}

// (cx+d)^deg(f) * f((ax+b)/(cx+d)), expanded.
inline Poly star_action(const ProjMatrix& g, const Poly& f) {
  require(!f.is_zero(), Err::ZeroPolynomial, "star action on zero polynomial");
  require(!g.tw->is_zero(g.det()), Err::Internal, "star action by singular matrix");
  const TowerPtr& t = f.tw;
  int lvl = f.lvl;
  int n = f.deg();
  Poly num(t, lvl, {g.b, g.a});   // ax + b
  Poly den(t, lvl, {g.d, g.c});   // cx + d
  // Precompute powers.
  std::vector<Poly> np{Poly::one(t, lvl)}, dp{Poly::one(t, lvl)};
  for (int i = 1; i <= n; ++i) {
    np.push_back(np.back() * num);
    dp.push_back(dp.back() * den);
  }
  Poly acc = Poly::zero(t, lvl);
  for (int i = 0; i <= n; ++i) {
    Elem fi = f.coeff((size_t)i);
    if (t->is_zero(fi)) continue;
    acc = acc + (np[(size_t)i] * dp[(size_t)(n - i)]).scaled(fi);
  }
  return acc;
}

// Homogeneous-degree-(q+1) action on V: members with alpha = 0 carry roots at
// infinity, compensated by extra factors of (cx+d).
inline VQuad star_action_vquad(const ProjMatrix& g, const VQuad& v, uint64_t q) {
  const TowerPtr& t = v.tw;
  int lvl = v.lvl;
  Poly f = expand_vquad(v, q);
  require(!f.is_zero(), Err::ZeroPolynomial, "star action on zero member");
  Poly r = star_action(g, f);
  Poly den(t, lvl, {g.d, g.c});
  for (int i = f.deg(); i < (int)q + 1; ++i) r = r * den;
  // Result must stay inside V.
  VQuad out{t, lvl, r.coeff((size_t)q + 1), r.coeff((size_t)q), r.coeff(1), r.coeff(0)};
  for (int i = 2; i <= (int)q - 1; ++i)
    require(t->is_zero(r.coeff((size_t)i)), Err::Internal, "star action left V");
  require(!out.is_zero(), Err::Internal, "star action produced zero");
  return out;
}

// psi(a, b) = (x-a)(x-b)^q as a VQuad; infinite coordinates per the affine
// conventions psi(inf, b) = (x-b)^q, psi(a, inf) = x-a, psi(inf, inf) = 1.
inline VQuad psi(const TowerPtr& t, int lvl, const P1Point& a, const P1Point& b, uint64_t q) {
  (void)q;
  Elem zero = t->zero(lvl), one = t->one(lvl);
  if (a.inf && b.inf) return {t, lvl, zero, zero, zero, one};
  if (a.inf) {
    Elem bq = t->pow(lvl, b.v, q);
    return {t, lvl, zero, one, zero, t->neg(lvl, bq)};
  }
  if (b.inf) return {t, lvl, zero, zero, one, t->neg(lvl, a.v)};
  Elem bq = t->pow(lvl, b.v, q);
  return {t, lvl, one, t->neg(lvl, a.v), t->neg(lvl, bq), t->mul(lvl, a.v, bq)};
}

// S is cut out by alpha*delta = beta*gamma.
inline bool in_surface_S(const VQuad& v) {
  const TowerPtr& t = v.tw;
  return t->mul(v.lvl, v.al, v.de) == t->mul(v.lvl, v.be, v.ga);
}

// Numerator of phi(v) = v with x^q replaced by h0/h1:
//   N = alpha*x*h0 + beta*h0 + gamma*x*h1 + delta*h1, degree <= 3.
inline Poly phi_numerator(const VQuad& v, const FieldRepresentation& rep) {
  const TowerPtr& t = v.tw;
  int lvl = v.lvl;
  Poly h0 = rep.h0.lift_to(t, lvl);
  Poly h1 = rep.h1.lift_to(t, lvl);
  Poly x = Poly::x(t, lvl);
  Poly n = (x * h0).scaled(v.al) + h0.scaled(v.be) + (x * h1).scaled(v.ga) + h1.scaled(v.de);
  return n;
}

// ---------------------------------------------------------------------------
// The pencil P^1_Q.
// ---------------------------------------------------------------------------

struct Pencil {
  Poly Q;        // monic irreducible quadratic over K
  VQuad f1, f2;  // canonical kernel basis (reduced echelon, pivots in alpha..delta order)

  VQuad member(const Elem& alpha, const Elem& beta) const {
    const TowerPtr& t = Q.tw;
    int lvl = Q.lvl;
    VQuad m{t, lvl,
            t->add(lvl, t->mul(lvl, f1.al, alpha), t->mul(lvl, f2.al, beta)),
            t->add(lvl, t->mul(lvl, f1.be, alpha), t->mul(lvl, f2.be, beta)),
            t->add(lvl, t->mul(lvl, f1.ga, alpha), t->mul(lvl, f2.ga, beta)),
            t->add(lvl, t->mul(lvl, f1.de, alpha), t->mul(lvl, f2.de, beta))};
    return m;
  }

  // P^1(K) indexing: 0 -> (1:0), i+1 -> (t_i:1).
  VQuad member_by_index(uint64_t idx) const {
    const TowerPtr& t = Q.tw;
    if (idx == 0) return member(t->one(Q.lvl), t->zero(Q.lvl));
    return member(t->index_to_elem(Q.lvl, idx - 1), t->one(Q.lvl));
  }
};

// Kernel of the map (alpha,beta,gamma,delta) -> N mod Q (two K-linear
// conditions). Returns the dimension and a reduced-echelon basis.
inline std::pair<int, std::vector<VQuad>> pencil_kernel(const Poly& Q,
                                                        const FieldRepresentation& rep) {
  const TowerPtr& t = Q.tw;
  int lvl = Q.lvl;
  // Columns: reductions mod Q of x*h0, h0, x*h1, h1.
  Poly h0 = rep.h0.lift_to(t, lvl);
  Poly h1 = rep.h1.lift_to(t, lvl);
  Poly x = Poly::x(t, lvl);
  Poly cols[4] = {(x * h0) % Q, h0 % Q, (x * h1) % Q, h1 % Q};
  // 2x4 matrix over K: rows are the coefficients of 1 and x.
  Elem M[2][4];
  for (int j = 0; j < 4; ++j) {
    M[0][j] = cols[j].coeff(0);
    M[1][j] = cols[j].coeff(1);
  }
  // Gaussian elimination.
  int rank = 0;
  int pivot_col[2] = {-1, -1};
  for (int col = 0; col < 4 && rank < 2; ++col) {
    int sel = -1;
    for (int r = rank; r < 2; ++r)
      if (!t->is_zero(M[r][col])) {
        sel = r;
        break;
      }
    if (sel < 0) continue;
    if (sel != rank)
      for (int j = 0; j < 4; ++j) std::swap(M[sel][j], M[rank][j]);
    Elem inv = t->inv(lvl, M[rank][col]);
    for (int j = 0; j < 4; ++j) M[rank][j] = t->mul(lvl, M[rank][j], inv);
    for (int r = 0; r < 2; ++r) {
      if (r == rank) continue;
      Elem c = M[r][col];
      if (t->is_zero(c)) continue;
      for (int j = 0; j < 4; ++j)
        M[r][j] = t->sub(lvl, M[r][j], t->mul(lvl, c, M[rank][j]));
    }
    pivot_col[rank] = col;
    ++rank;
  }
  // Kernel basis: one vector per free column, reduced echelon in the free
  // coordinates.
  bool is_pivot[4] = {false, false, false, false};
  for (int r = 0; r < rank; ++r) is_pivot[pivot_col[r]] = true;
  std::vector<VQuad> basis;
  for (int free_col = 0; free_col < 4; ++free_col) {
    if (is_pivot[free_col]) continue;
    Elem coords[4];
    for (int j = 0; j < 4; ++j) coords[j] = t->zero(lvl);
    coords[free_col] = t->one(lvl);
    for (int r = 0; r < rank; ++r)
      coords[pivot_col[r]] = t->neg(lvl, M[r][free_col]);
    basis.push_back(VQuad{t, lvl, coords[0], coords[1], coords[2], coords[3]});
  }
  return {4 - rank, std::move(basis)};
}

inline bool is_irreducible_quadratic(const Poly& Q) {
  return Q.deg() == 2 && Q.monic() && is_irreducible(Q);
}

inline Pencil build_pencil(const Poly& Q, const FieldRepresentation& rep) {
  require(is_irreducible_quadratic(Q), Err::NotIrreducibleQuadratic,
          "build_pencil: Q must be a monic irreducible quadratic");
  Poly h1K = rep.h1.lift_to(Q.tw, Q.lvl);
  require(poly_gcd(Q, h1K).is_one(), Err::TrapInput, "build_pencil: Q shares a root with h1");
  auto [dim, basis] = pencil_kernel(Q, rep);
  require(dim == 2, Err::KernelDimensionNot2,
          "build_pencil: kernel dimension " + std::to_string(dim) + " != 2");
  return Pencil{Q, basis[0], basis[1]};
}

// ---------------------------------------------------------------------------
// Special points s1 = psi(a1,b1), s2 = psi(a2,b2) in the quadratic extension
// K2 = K[y]/(Q); b1 = (h0/h1)(a2)^(1/q), b2 = (h0/h1)(a1)^(1/q).
// ---------------------------------------------------------------------------

struct SurfacePoints {
  TowerPtr tw2;  // chain extended by Q; level = K2
  int lvl2 = 0;
  Elem a1, a2, b1, b2;
  VQuad s1, s2;
};

inline SurfacePoints surface_points(const Poly& Q, const FieldRepresentation& rep) {
  require(is_irreducible_quadratic(Q), Err::NotIrreducibleQuadratic,
          "surface_points: Q must be a monic irreducible quadratic");
  const TowerPtr& tK = Q.tw;
  int lvlK = Q.lvl;
  TowerPtr t2 = tK->extend(Q.c);
  int lvl2 = t2->top_level();
  uint64_t cardK_steps = tK->abs_degree(lvlK);  // #K = p^cardK_steps
  Elem a1 = t2->gen(lvl2);
  Elem a2 = t2->frob_p_power(lvl2, a1, cardK_steps);
  Poly h0 = rep.h0.lift_to(t2, lvl2);
  Poly h1 = rep.h1.lift_to(t2, lvl2);
  Elem h1a1 = h1.eval(a1);
  require(!t2->is_zero(h1a1), Err::TrapInput, "surface_points: h1 vanishes at a root of Q");
  Elem w1 = t2->div(lvl2, h0.eval(a1), h1a1);  // (h0/h1)(a1)
  Elem w2 = t2->frob_p_power(lvl2, w1, cardK_steps);  // (h0/h1)(a2) by Galois
  // Degenerate trap: (h0/h1)(a1) already lies in K.
  require(!(w2 == w1), Err::DegenerateTrap,
          "surface_points: (h0/h1)(a1) is K-rational (degenerate trap)");
  // q-th roots: c^(1/q) = c^(#K2 / q); #K2 = p^(2*cardK_steps), q = p^a.
  uint64_t root_steps = 2 * cardK_steps - rep.a;
  Elem b1 = t2->frob_p_power(lvl2, w2, root_steps);
  Elem b2 = t2->frob_p_power(lvl2, w1, root_steps);
  VQuad s1 = psi(t2, lvl2, P1Point::finite(a1), P1Point::finite(b1), rep.q);
  VQuad s2 = psi(t2, lvl2, P1Point::finite(a2), P1Point::finite(b2), rep.q);
  require(in_surface_S(s1) && in_surface_S(s2), Err::Internal,
          "surface_points: psi image escaped S");
  return {t2, lvl2, a1, a2, b1, b2, s1, s2};
}

// Rank check that s lies in the K2-span of the pencil basis.
inline bool vquad_in_span(const VQuad& s, const VQuad& f1, const VQuad& f2) {
  const TowerPtr& t = s.tw;
  int lvl = s.lvl;
  // 4x3 system [f1 f2 | s]; s in span iff rank([f1 f2]) == rank([f1 f2 s]).
  std::vector<std::array<Elem, 3>> rows;
  auto push = [&](const Elem& x, const Elem& y, const Elem& z) {
    rows.push_back({x, y, z});
  };
  push(f1.al, f2.al, s.al);
  push(f1.be, f2.be, s.be);
  push(f1.ga, f2.ga, s.ga);
  push(f1.de, f2.de, s.de);
  int rank2 = 0, rank3 = 0;
  // Eliminate on the first two columns.
  size_t r0 = 0;
  for (int col = 0; col < 3; ++col) {
    size_t sel = r0;
    while (sel < rows.size() && t->is_zero(rows[sel][(size_t)col])) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[sel], rows[r0]);
    Elem inv = t->inv(lvl, rows[r0][(size_t)col]);
    for (auto& e : rows[r0]) e = t->mul(lvl, e, inv);
    for (size_t r = 0; r < rows.size(); ++r) {
      if (r == r0) continue;
      Elem c = rows[r][(size_t)col];
      if (t->is_zero(c)) continue;
      for (int j = 0; j < 3; ++j)
        rows[r][(size_t)j] = t->sub(lvl, rows[r][(size_t)j], t->mul(lvl, c, rows[r0][(size_t)j]));
    }
    ++r0;
    if (col < 2) rank2 = (int)r0;
    rank3 = (int)r0;
  }
  return rank2 == rank3;
}

// ---------------------------------------------------------------------------
// The parameterization r -> member s2(r)*s1 - s1(r)*s2 and theta(r) =
// s1(r)/s2(r). Values "at infinity" are the alpha coefficients.
// ---------------------------------------------------------------------------

inline Elem vquad_value_at(const VQuad& s, const P1Point& r, uint64_t q) {
  if (r.inf) return s.al;
  return expand_vquad(s, q).eval(r.v);
}

inline VQuad member_with_root(const SurfacePoints& sp, const P1Point& r, uint64_t q) {
  const TowerPtr& t = sp.tw2;
  int lvl = sp.lvl2;
  Elem v1 = vquad_value_at(sp.s1, r, q);
  Elem v2 = vquad_value_at(sp.s2, r, q);
  require(!(t->is_zero(v1) && t->is_zero(v2)), Err::BothSpecialVanish,
          "member_with_root: both special points vanish at r");
  auto scale = [&](const VQuad& s, const Elem& c) {
    return VQuad{t, lvl, t->mul(lvl, s.al, c), t->mul(lvl, s.be, c), t->mul(lvl, s.ga, c),
                 t->mul(lvl, s.de, c)};
  };
  VQuad m1 = scale(sp.s1, v2);
  VQuad m2 = scale(sp.s2, v1);
  VQuad m{t, lvl, t->sub(lvl, m1.al, m2.al), t->sub(lvl, m1.be, m2.be),
          t->sub(lvl, m1.ga, m2.ga), t->sub(lvl, m1.de, m2.de)};
  require(!m.is_zero(), Err::Internal, "member_with_root: degenerate member");
  return m;
}

inline P1Point theta(const SurfacePoints& sp, const P1Point& r, uint64_t q) {
  const TowerPtr& t = sp.tw2;
  Elem v1 = vquad_value_at(sp.s1, r, q);
  Elem v2 = vquad_value_at(sp.s2, r, q);
  require(!(t->is_zero(v1) && t->is_zero(v2)), Err::BothSpecialVanish,
          "theta: both special points vanish at r");
  if (t->is_zero(v2)) return P1Point::infinity();
  return P1Point::finite(t->div(sp.lvl2, v1, v2));
}

}  // namespace podlog
