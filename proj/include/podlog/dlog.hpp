#pragma once

// Full DLP pipeline: relation collection by descending g^alpha * h^beta,
// dense linear algebra modulo each prime power of the group order, CRT
// recombination, and a mandatory final verification g^x == h. Soundness is
// unconditional: nothing is returned unverified.

#include "podlog/descent.hpp"

namespace podlog {

struct DlogInstance {
  const FieldRepresentation* rep;
  Poly g, h;   // nonzero elements of F_{q^d}[x]/(I)
  uint64_t N;  // group order q^(d*ell) - 1
  std::vector<std::pair<uint64_t, int>> N_factors;
};

inline DlogInstance make_instance(const FieldRepresentation& rep, Poly g, Poly h) {
  DlogInstance inst;
  inst.rep = &rep;
  TargetField F(rep);
  inst.g = F.reduce(g);
  inst.h = F.reduce(h);
  require(!inst.g.is_zero() && !inst.h.is_zero(), Err::DivisionByZero,
          "dlog: g and h must be nonzero");
  inst.N = rep.group_order();
  inst.N_factors = factor_u64(inst.N);
  return inst;
}

struct RelationRow {
  uint64_t alpha = 0, beta = 0;
  std::vector<int64_t> exps;
  DescentStats stats;
};

// Rows are deterministic per index: row i draws from substream(seed, i) and
// resamples its own exponents until its descent succeeds.
inline std::vector<RelationRow> collect_relations(const DlogInstance& inst, DescentEngine& eng,
                                                  size_t count, uint64_t seed,
                                                  size_t start_index = 0,
                                                  uint64_t resamples_per_row = 64) {
  TargetField F(*inst.rep);
  std::vector<RelationRow> rows;
  for (size_t i = start_index; rows.size() < count; ++i) {
    Rng rng(sub_seed(seed, 0x20b5, i));
    bool done = false;
    for (uint64_t att = 0; att < resamples_per_row && !done; ++att) {
      RelationRow row;
      row.alpha = rng.below(inst.N);
      row.beta = rng.below(inst.N);
      Poly T = F.mul(F.pow(inst.g, row.alpha), F.pow(inst.h, row.beta));
      try {
        RelationLedger led = eng.descend(T);
        row.exps = led.exps;
        row.stats = eng.last_stats();
        // replay before acceptance
        require(verify_ledger(*inst.rep, eng.factor_base(), row.exps, T,
                              inst.rep->tower->one(kLvlBase)),
                Err::Internal, "relation replay failed");
        rows.push_back(std::move(row));
        done = true;
      } catch (const Error& err) {
        if (err.code() == Err::DescentFailed || err.code() == Err::BudgetExhausted ||
            err.code() == Err::TrialsExhausted || err.code() == Err::LiftExhausted)
          continue;  // resample this row
        throw;
      }
    }
    require(done, Err::BudgetExhausted, "relation collection: row kept failing to descend");
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Linear algebra over Z/r^k. Gauss-Jordan with minimum-valuation pivoting and
// Bezout row combinations, so non-unit pivots are handled exactly.
// ---------------------------------------------------------------------------

struct ModSolveResult {
  bool consistent = true;
  // Per-unknown solution and the modulus to which it is pinned (1 = unknown).
  std::vector<uint64_t> value;
  std::vector<uint64_t> modulus;
};

inline ModSolveResult solve_mod_prime_power(std::vector<std::vector<uint64_t>> A,
                                            std::vector<uint64_t> b, uint64_t pk, uint64_t r) {
  size_t rows = A.size();
  size_t cols = rows ? A[0].size() : 0;
  auto val_r = [&](uint64_t x) {
    if (x == 0) return (int)64;
    int v = 0;
    while (x % r == 0) {
      x /= r;
      ++v;
    }
    return v;
  };
  std::vector<int> pivot_of_col(cols, -1);
  size_t row = 0;
  for (size_t col = 0; col < cols && row < rows; ++col) {
    size_t sel = rows;
    int best_v = 65;
    for (size_t i = row; i < rows; ++i) {
      uint64_t a = A[i][col] % pk;
      if (a == 0) continue;
      int v = val_r(a);
      if (v < best_v) {
        best_v = v;
        sel = i;
      }
    }
    if (sel == rows) continue;
    std::swap(A[sel], A[row]);
    std::swap(b[sel], b[row]);
    uint64_t piv = A[row][col] % pk;
    // piv = unit * r^v; scale the row by unit^-1 so the pivot is r^v.
    uint64_t rv = 1;
    for (int i = 0; i < best_v; ++i) rv *= r;
    uint64_t unit = piv / rv;
    uint64_t uinv = modinv_u64(unit % pk, pk);
    for (size_t j = 0; j < cols; ++j) A[row][j] = mulmod_u64(A[row][j], uinv, pk);
    b[row] = mulmod_u64(b[row], uinv, pk);
    for (size_t i = 0; i < rows; ++i) {
      if (i == row) continue;
      uint64_t a = A[i][col] % pk;
      if (a == 0) continue;
      if (val_r(a) < best_v) continue;  // cannot eliminate; left for consistency checks
      uint64_t f = a / rv;  // a = f * r^v
      for (size_t j = 0; j < cols; ++j) {
        uint64_t s = mulmod_u64(f, A[row][j], pk);
        A[i][j] = (A[i][j] + pk - s) % pk;
      }
      uint64_t s = mulmod_u64(f, b[row], pk);
      b[i] = (b[i] + pk - s) % pk;
    }
    pivot_of_col[col] = (int)row;
    ++row;
  }
  ModSolveResult res;
  res.value.assign(cols, 0);
  res.modulus.assign(cols, 1);
  // Rows without pivots must be 0 = 0.
  for (size_t i = row; i < rows; ++i) {
    bool zero_row = true;
    for (size_t j = 0; j < cols; ++j)
      if (A[i][j] % pk) zero_row = false;
    if (zero_row && b[i] % pk != 0) {
      res.consistent = false;
      return res;
    }
  }
  // Back-substitution on the reduced rows: pivot r^v * x = rhs, other pivots
  // eliminated; free columns poison any row they touch.
  std::vector<bool> is_pivot(cols, false);
  for (size_t c = 0; c < cols; ++c)
    if (pivot_of_col[c] >= 0) is_pivot[c] = true;
  for (size_t c = 0; c < cols; ++c) {
    int pr = pivot_of_col[c];
    if (pr < 0) continue;
    uint64_t piv = A[(size_t)pr][c] % pk;
    bool coupled = false;
    for (size_t j = 0; j < cols; ++j) {
      if (j == c) continue;
      if (A[(size_t)pr][j] % pk) {
        coupled = true;  // depends on a free/undetermined unknown
        break;
      }
    }
    if (coupled) continue;
    uint64_t rhs = b[(size_t)pr] % pk;
    // piv = r^v; solvable iff r^v | rhs, pinned modulo pk / r^v.
    uint64_t rv = piv;
    if (rhs % rv != 0) {
      res.consistent = false;
      return res;
    }
    uint64_t mod = pk / rv;
    res.value[c] = (rhs / rv) % (mod ? mod : 1);
    res.modulus[c] = mod;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Solving for x = log_g h.
// ---------------------------------------------------------------------------

struct DlogSolution {
  uint64_t x = 0;
  uint64_t ord_g = 0;
};

// In the cyclic ambient group, h lies in <g> iff ord(h) divides ord(g); this
// is the non-membership certificate.
inline DlogSolution solve_mod_composite(const std::vector<RelationRow>& rows,
                                        const DlogInstance& inst) {
  const FieldRepresentation& rep = *inst.rep;
  TargetField F(rep);
  uint64_t ord_g = element_order(F, inst.g, inst.N, inst.N_factors);
  uint64_t ord_h = element_order(F, inst.h, inst.N, inst.N_factors);
  require(ord_g % ord_h == 0, Err::NotInSubgroup,
          "dlog: ord(h) does not divide ord(g); h is not a power of g");
  size_t nf = rows.empty() ? 0 : rows[0].exps.size();
  require(!rows.empty(), Err::SingularSystem, "dlog: no relations");
  // Unknowns: logs of the factor base entries, then X = log_g h.
  // Row i: sum_f e_fi L_f - beta_i X = alpha_i (mod N).
  size_t cols = nf + 1;
  uint64_t x = 0, xmod = 1;
  for (auto [r, k] : factor_u64(ord_g)) {
    int kN = 0;
    uint64_t pk = 1;
    for (auto [rr, kk] : inst.N_factors)
      if (rr == r) kN = kk;
    for (int i = 0; i < kN; ++i) pk *= r;
    uint64_t need = 1;
    for (int i = 0; i < k; ++i) need *= r;  // r^(v_r(ord_g))
    std::vector<std::vector<uint64_t>> A(rows.size(), std::vector<uint64_t>(cols, 0));
    std::vector<uint64_t> b(rows.size(), 0);
    for (size_t i = 0; i < rows.size(); ++i) {
      for (size_t j = 0; j < nf; ++j) {
        int64_t e = rows[i].exps[j];
        uint64_t em = e >= 0 ? (uint64_t)e % pk : (pk - (uint64_t)(-e) % pk) % pk;
        A[i][j] = em;
      }
      A[i][nf] = (pk - rows[i].beta % pk) % pk;
      b[i] = rows[i].alpha % pk;
    }
    auto sol = solve_mod_prime_power(std::move(A), std::move(b), pk, r);
    require(sol.consistent, Err::SingularSystem,
            "dlog: inconsistent system mod " + std::to_string(r) + "^" + std::to_string(kN));
    require(sol.modulus[nf] % need == 0, Err::SingularSystem,
            "dlog: X undetermined mod " + std::to_string(need));
    uint64_t xr = sol.value[nf] % need;
    // CRT fold (moduli are coprime prime powers).
    uint64_t m1 = xmod, m2 = need;
    uint64_t inv = modinv_u64(m1 % m2, m2);
    uint64_t diff = (xr + m2 - x % m2) % m2;
    x = x + m1 * mulmod_u64(diff, inv, m2);
    xmod = m1 * m2;
  }
  require(xmod == ord_g, Err::SingularSystem, "dlog: combined modulus mismatch");
  uint64_t xr = x % ord_g;
  require(F.pow(inst.g, xr) == F.reduce(inst.h), Err::SingularSystem,
          "dlog: candidate failed verification");
  return {xr, ord_g};
}

struct DlogOptions {
  size_t extra_rows = 8;     // initial rows beyond |F| + 2
  size_t max_batches = 6;    // additional row batches on singular systems
  DescentOptions descent;
};

struct DlogReport {
  uint64_t x = 0;
  uint64_t ord_g = 0;
  size_t relations = 0;
  uint64_t eliminations = 0;
  uint64_t elimination_trials = 0;
  uint64_t lifts = 0;
  int max_lift_e = 0;
};

inline DlogReport dlog(const DlogInstance& inst, uint64_t seed, DlogOptions opts = {}) {
  DescentEngine eng(*inst.rep, sub_seed(seed, 0xde5ce27), opts.descent);
  size_t base_count = eng.factor_base().size() + 2 + opts.extra_rows;
  std::vector<RelationRow> rows =
      collect_relations(inst, eng, base_count, sub_seed(seed, 0x2e1a7), 0);
  DlogReport rp;
  for (size_t batch = 0;; ++batch) {
    try {
      auto sol = solve_mod_composite(rows, inst);
      rp.x = sol.x;
      rp.ord_g = sol.ord_g;
      break;
    } catch (const Error& err) {
      if (err.code() != Err::SingularSystem || batch >= opts.max_batches) throw;
      auto more = collect_relations(inst, eng, 8, sub_seed(seed, 0x2e1a7), rows.size(), 64);
      for (auto& r : more) rows.push_back(std::move(r));
    }
  }
  // Mandatory final verification (solve_mod_composite also checks).
  TargetField F(*inst.rep);
  require(F.pow(inst.g, rp.x) == F.reduce(inst.h), Err::Internal,
          "dlog: verification failed after solve");
  rp.relations = rows.size();
  for (auto& r : rows) {
    rp.eliminations += r.stats.eliminations;
    rp.elimination_trials += r.stats.elimination_trials;
    rp.lifts += r.stats.lifts;
    rp.max_lift_e = std::max(rp.max_lift_e, r.stats.max_lift_e);
  }
  return rp;
}

}  // namespace podlog
