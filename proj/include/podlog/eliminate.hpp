#pragma once

// Degree-two elimination: given a good monic irreducible quadratic Q over an
// extension K of F_{q^d}, sample the pencil P^1_Q(K) until a member f splits
// completely over K into good distinct linear factors; then the numerator N
// of phi(f) factors exactly as Q * L0 and, with c the leading coefficient of
// f, the relation c * h1 * prod(linears) == Q * L0 holds modulo I.

#include "podlog/pencil.hpp"
#include "podlog/traps.hpp"

namespace podlog {

struct Elimination {
  Poly Q;                    // monic irreducible quadratic over K
  Elem unit;                 // leading coefficient of the accepted member
  Poly L0;                   // degree <= 1, appears with exponent -1
  std::vector<Poly> linears; // monic linear factors over K, n <= q+1 of them
  int h1_exponent = 1;
  uint64_t trials_used = 0;
};

// Outcome of testing one pencil member against the acceptance predicate.
struct MemberTest {
  bool degenerate = false;   // N == 0
  bool splits = false;       // expand(f) splits completely over K
  bool distinct = false;     // ... with all rational roots simple and deg >= q
  bool good = false;         // ... and every linear factor and L0 usable
  VQuad f;
  Poly N, L0;
  Elem unit;
  std::vector<Poly> linears;
};

// The shared per-member predicate: exactly what eliminate_quadratic accepts.
inline MemberTest test_pencil_member(const Pencil& pencil, const VQuad& f,
                                     const FieldRepresentation& rep, uint64_t seed) {
  MemberTest out;
  out.f = f;
  const TowerPtr& t = f.tw;
  int lvl = f.lvl;
  Poly N = phi_numerator(f, rep);
  if (N.is_zero()) {
    // Possible only when deg h0 <= 1 and deg h1 <= 1; contributes nothing.
    out.degenerate = true;
    return out;
  }
  auto [L0, remn] = N.divrem(pencil.Q);
  require(remn.is_zero(), Err::Internal, "pencil member numerator not divisible by Q");
  out.N = N;
  out.L0 = L0;
  Poly F = expand_vquad(f, rep.q);
  if (F.deg() < (int)rep.q) return out;  // root of degree >= 2 at infinity
  auto roots = roots_and_split_test(F, sub_seed(seed, 0xe11));
  out.splits = roots.splits_completely;
  if (!out.splits) return out;
  out.distinct = roots.distinct;
  if (!out.distinct) return out;
  // Goodness of every linear factor and of L0.
  for (auto& [r, mult] : roots.roots) {
    (void)mult;
    Poly lin = Poly::linear_root(t, lvl, r);
    TrapClass c = classify_irreducible(lin, rep);
    if (trap_class_is_trap(c) || c == TrapClass::H1SharedRoot) return out;
    out.linears.push_back(lin);
  }
  if (L0.deg() == 1) {
    TrapClass c = classify_irreducible(L0.make_monic().first, rep);
    if (trap_class_is_trap(c) || c == TrapClass::H1SharedRoot) return out;
  }
  out.unit = F.lc();
  out.good = true;
  return out;
}

// Exact check of the stored congruence c * h1 * prod(L_i) == Q * L0 in
// K[x] mod I (I stays a valid modulus over K and h1 is invertible mod I).
inline bool verify_elimination(const Elimination& e, const FieldRepresentation& rep) {
  const TowerPtr& t = e.Q.tw;
  int lvl = e.Q.lvl;
  Poly I_K = rep.I.lift_to(t, lvl);
  Poly h1K = rep.h1.lift_to(t, lvl);
  Poly lhs = Poly::constant(t, lvl, e.unit);
  for (int i = 0; i < e.h1_exponent; ++i) lhs = (lhs * h1K) % I_K;
  for (auto& l : e.linears) lhs = (lhs * l) % I_K;
  Poly rhs = (e.Q * e.L0) % I_K;
  return lhs == rhs;
}

struct EliminateOptions {
  uint64_t max_trials = 0;  // 0: default 64*q^3
  int threads = 1;
};

inline uint64_t default_max_trials(uint64_t q) { return 64 * q * q * q; }

// Throws TrapInput when Q is not usable, PencilDegenerate when the kernel is
// not 2-dimensional, TrialsExhausted when the budget runs out (a legitimate
// outcome at small dm; callers retry with a conjugate or a fresh lift).
inline Elimination eliminate_quadratic(const Poly& Q, const FieldRepresentation& rep,
                                       uint64_t seed, EliminateOptions opts = {}) {
  require(is_irreducible_quadratic(Q), Err::NotIrreducibleQuadratic,
          "eliminate: Q must be a monic irreducible quadratic");
  const TowerPtr& t = Q.tw;
  int lvl = Q.lvl;
  Poly h1K = rep.h1.lift_to(t, lvl);
  require(poly_gcd(Q, h1K).is_one(), Err::TrapInput, "eliminate: Q shares a root with h1");
  TrapClass qc = classify_irreducible(Q, rep);
  require(!trap_class_is_trap(qc) && qc != TrapClass::H1SharedRoot, Err::TrapInput,
          std::string("eliminate: Q is not good (") + trap_class_name(qc) + ")");
  Pencil pencil;
  try {
    pencil = build_pencil(Q, rep);
  } catch (const Error& err) {
    if (err.code() == Err::KernelDimensionNot2) fail(Err::PencilDegenerate, err.what());
    throw;
  }

  uint64_t max_trials = opts.max_trials ? opts.max_trials : default_max_trials(rep.q);
  // Pencil size #K + 1 when enumerable.
  uint64_t pencil_size = 0;
  bool enumerable = t->card_fits_u64(lvl) && t->card_u64(lvl) < UINT64_MAX;
  if (enumerable) pencil_size = t->card_u64(lvl) + 1;

  // When the whole pencil fits in the trial budget, visit it in a seeded
  // random order (without replacement); emptiness is then a proven fact.
  std::vector<uint64_t> perm;
  bool exhaustive = enumerable && pencil_size <= max_trials && pencil_size <= (1u << 22);
  if (exhaustive) {
    perm.resize(pencil_size);
    for (uint64_t i = 0; i < pencil_size; ++i) perm[i] = i;
    Rng shuffle_rng(sub_seed(seed, 0x5f1e));
    for (uint64_t i = pencil_size; i > 1; --i) {
      uint64_t j = shuffle_rng.below(i);
      std::swap(perm[(size_t)(i - 1)], perm[(size_t)j]);
    }
    max_trials = pencil_size;
  }

  // Per-trial results are index-addressed so thread count cannot change the
  // outcome: the accepted member is the one with the smallest trial index.
  std::atomic<uint64_t> best{UINT64_MAX};
  std::vector<std::optional<MemberTest>> hits((size_t)std::min<uint64_t>(max_trials, 1u << 22));
  uint64_t total = hits.size();

  auto run_trial = [&](uint64_t trial) {
    VQuad f{t, lvl, {}, {}, {}, {}};
    if (exhaustive) {
      f = pencil.member_by_index(perm[(size_t)trial]);
    } else {
      Rng trng(sub_seed(seed, 0x7121a1, trial));
      uint64_t idx;
      if (enumerable) {
        idx = trng.below(pencil_size);
        f = pencil.member_by_index(idx);
      } else {
        // #K does not fit u64: the point at infinity has negligible mass.
        FieldElement alpha = random_element(t, lvl, trng);
        f = pencil.member(alpha.v, t->one(lvl));
      }
    }
    if (f.is_zero()) return;  // (alpha:beta) hit the kernel of the basis combination
    MemberTest mt = test_pencil_member(pencil, f, rep, sub_seed(seed, 0x7e57, trial));
    if (mt.good) {
      hits[(size_t)trial] = std::move(mt);
      uint64_t cur = best.load();
      while (trial < cur && !best.compare_exchange_weak(cur, trial)) {
      }
    }
  };

  uint64_t batch = opts.threads > 1 ? (uint64_t)opts.threads * 8 : 64;
  for (uint64_t lo = 0; lo < total; lo += batch) {
    uint64_t hi = std::min(total, lo + batch);
    parallel_ranges(hi - lo, opts.threads, [&](uint64_t s, uint64_t e) {
      for (uint64_t i = s; i < e; ++i) run_trial(lo + i);
    });
    if (best.load() < hi) break;
  }
  uint64_t win = best.load();
  if (win == UINT64_MAX)
    fail(Err::TrialsExhausted,
         "eliminate: no good split member in " + std::to_string(total) + " trials");
  MemberTest& mt = *hits[(size_t)win];
  Elimination e;
  e.Q = Q;
  e.unit = mt.unit;
  e.L0 = mt.L0;
  e.linears = std::move(mt.linears);
  e.h1_exponent = 1;
  e.trials_used = win + 1;
  require((int)e.linears.size() <= (int)rep.q + 1, Err::Internal, "eliminate: n > q+1");
  require(verify_elimination(e, rep), Err::Internal, "eliminate: congruence failed to verify");
  return e;
}

}  // namespace podlog
