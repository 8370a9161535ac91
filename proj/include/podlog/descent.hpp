#pragma once

// The zigzag descent: a target polynomial over F_{q^d} is reduced mod I,
// factored, and every irreducible factor is driven down to the factor base
//   F = {nonzero constants} ∪ {monic linears} ∪ {h1}
// by the recursion: a good irreducible node of degree 2^j splits over the
// degree-2^(j-1) extension K into conjugate quadratics, one of which is
// eliminated into linears over K; conjugate norms push those back down to
// F_{q^d} as polynomials of 2-power degree, and the recursion continues.
// Nodes that are not good, or whose degree is not a power of two, or whose
// elimination level is starved of split members (tiny dm), are re-randomized
// upward: lift to G = F~ + R*I of degree 2^e, good and irreducible, G == F
// mod I, and descend G instead.

#include <iostream>
#include <map>
#include <set>

#include "podlog/eliminate.hpp"

namespace podlog {

inline constexpr int kLvlWork = 3;  // working extension K on a descent tower

// ---------------------------------------------------------------------------
// Factor base with a canonical index: constants (element index 1..#F-1),
// then monic linears x + c (c in element order), then h1.
// ---------------------------------------------------------------------------

class FactorBase {
 public:
  explicit FactorBase(const FieldRepresentation& rep) : rep_(&rep) {
    base_card_ = rep.base_card();
    require(base_card_ <= (1ULL << 20), Err::TooLarge,
            "factor base: q^d too large to enumerate");
  }

  size_t size() const { return (size_t)(base_card_ - 1 + base_card_ + 1); }
  size_t h1_index() const { return size() - 1; }

  size_t constant_index(const Elem& c) const {
    uint64_t i = rep_->tower->elem_to_index(kLvlBase, c);
    require(i >= 1, Err::DivisionByZero, "factor base: zero constant");
    return (size_t)(i - 1);
  }

  size_t monic_linear_index(const Elem& c0) const {
    return (size_t)(base_card_ - 1 + rep_->tower->elem_to_index(kLvlBase, c0));
  }

  Poly entry(size_t idx) const {
    const TowerPtr& t = rep_->tower;
    if (idx < base_card_ - 1) return Poly::constant(t, kLvlBase, t->index_to_elem(kLvlBase, idx + 1));
    if (idx < 2 * base_card_ - 1) {
      Elem c0 = t->index_to_elem(kLvlBase, idx - (base_card_ - 1));
      return Poly(t, kLvlBase, {c0, t->one(kLvlBase)});
    }
    require(idx == h1_index(), Err::Internal, "factor base: index out of range");
    return rep_->h1;
  }

 private:
  const FieldRepresentation* rep_;
  uint64_t base_card_ = 0;
};

// ---------------------------------------------------------------------------
// Ledger and audit trail.
// ---------------------------------------------------------------------------

struct AuditNode {
  Poly poly;               // over F_{q^d}
  uint64_t elim_degree = 0;  // [K : F_{q^d}] of the elimination, 0 for leaves/lifts
  int lift_e = -1;           // set when this node is a lift target
  bool smoothed = false;     // resolved by multiplicative re-randomization
  uint64_t trials = 0;       // elimination trials used
  bool from_memo = false;
  std::shared_ptr<const std::vector<int64_t>> exps;  // partial ledger of this subtree
  std::vector<std::pair<std::shared_ptr<AuditNode>, int64_t>> children;
};

struct RelationLedger {
  Poly target;                 // reduced representative mod I
  std::vector<int64_t> exps;   // over factor-base indices
  std::shared_ptr<AuditNode> audit;
};

struct DescentStats {
  uint64_t eliminations = 0;
  uint64_t elimination_trials = 0;
  uint64_t lifts = 0;
  uint64_t lift_trials = 0;
  int max_lift_e = 0;
  uint64_t nodes = 0;
  uint64_t memo_hits = 0;
  uint64_t smoothings = 0;
  uint64_t smoothing_tries = 0;
};

// Replay: unit * prod entries^exps == target mod I, exponents mod the group order.
inline bool verify_ledger(const FieldRepresentation& rep, const FactorBase& fb,
                          const std::vector<int64_t>& exps, const Poly& target,
                          const Elem& unit) {
  TargetField F(rep);
  Poly acc = Poly::constant(rep.tower, kLvlBase, unit);
  for (size_t i = 0; i < exps.size(); ++i) {
    if (exps[i] == 0) continue;
    acc = F.mul(acc, F.pow_signed(fb.entry(i), exps[i]));
  }
  return acc == F.reduce(target);
}

inline bool verify_ledger(const FieldRepresentation& rep, const RelationLedger& led) {
  FactorBase fb(rep);
  return verify_ledger(rep, fb, led.exps, led.target, rep.tower->one(kLvlBase));
}

// ---------------------------------------------------------------------------
// Lifting: G = F~ + R*I with R random monic of degree 2^e - ell, so G is
// monic of degree 2^e and G == F mod I.
// ---------------------------------------------------------------------------

struct LiftResult {
  Poly G;     // monic good irreducible of degree 2^e
  int e = 0;
  Elem unit;  // F == unit * G mod I
};

inline int lift_min_e(uint32_t ell) {
  int e = 1;
  while ((1u << e) <= ell) ++e;
  return e;
}

inline int lift_max_e(uint32_t ell) {
  int e = 0;
  while ((1u << e) < 4 * ell + 1) ++e;
  return e;  // ceil(log2(4*ell + 1))
}

// One batch of attempts at a fixed e; nullopt when the trial budget is spent.
inline std::optional<Poly> try_lift_at(const Poly& F_red, const FieldRepresentation& rep, int e,
                                       uint64_t seed, uint64_t trials, uint64_t* used) {
  Rng rng(sub_seed(seed, 0x11f7, (uint64_t)e));
  int rdeg = (int)(1u << e) - (int)rep.ell;
  for (uint64_t i = 0; i < trials; ++i) {
    if (used) ++*used;
    Poly R = random_monic(rep.tower, kLvlBase, rdeg, rng);
    Poly G = F_red + R * rep.I;
    if (!is_irreducible(G)) continue;
    if (classify_irreducible(G, rep) != TrapClass::Good) continue;
    return G;
  }
  return std::nullopt;
}

inline LiftResult lift_power_of_two(const Poly& F, const FieldRepresentation& rep, uint64_t seed,
                                    uint64_t trials_per_e = 400) {
  Poly F_red = F % rep.I;
  require(!F_red.is_zero(), Err::ZeroPolynomial, "lift: F vanishes mod I");
  // Short-circuit: already a good irreducible of 2-power degree.
  auto [F_monic, u] = F_red.make_monic();
  if (F_monic.deg() >= 1 && ((uint64_t)F_monic.deg() & ((uint64_t)F_monic.deg() - 1)) == 0) {
    if (is_irreducible(F_monic)) {
      TrapClass c = classify_irreducible(F_monic, rep);
      if (c == TrapClass::Good || c == TrapClass::OddDegree) {
        int e = 0;
        while ((1 << e) < F_monic.deg()) ++e;
        return {F_monic, e, u};
      }
    }
  }
  for (int e = lift_min_e(rep.ell); e <= lift_max_e(rep.ell); ++e) {
    auto g = try_lift_at(F_red, rep, e, seed, trials_per_e, nullptr);
    if (g) return {*g, e, rep.tower->one(kLvlBase)};
  }
  fail(Err::LiftExhausted, "lift: no good irreducible lift up to e = " +
                               std::to_string(lift_max_e(rep.ell)));
}

// ---------------------------------------------------------------------------
// Conjugate quadratics of a good irreducible of degree 2^j over the base.
// ---------------------------------------------------------------------------

struct ConjugateSplit {
  TowerPtr tower;            // base chain extended by the degree-2^(j-1) level K
  std::vector<Poly> quads;   // the 2^(j-1) conjugate monic irreducible quadratics, canonical order
};

inline ConjugateSplit split_conjugate_quadratics(const Poly& G, const FieldRepresentation& rep,
                                                 const TowerPtr& work_tower, uint64_t seed) {
  int degG = G.deg();
  require(degG >= 2 && (degG & (degG - 1)) == 0, Err::UnexpectedFactorization,
          "split: degree must be a power of two >= 2");
  uint64_t half = (uint64_t)degG / 2;
  require(work_tower->abs_degree(kLvlWork) ==
              work_tower->abs_degree(kLvlBase) * half,
          Err::LevelMismatch, "split: working tower has the wrong degree");
  Poly GK = G.lift_to(work_tower, kLvlWork);
  auto fac = factorize(GK, sub_seed(seed, 0x59117));
  require(fac.factors.size() == half, Err::UnexpectedFactorization,
          "split: expected 2^(j-1) quadratic factors");
  std::vector<Poly> quads;
  for (auto& [f, mult] : fac.factors) {
    require(mult == 1 && f.deg() == 2, Err::UnexpectedFactorization,
            "split: factor is not a simple quadratic");
    quads.push_back(f);
  }
  // Single Galois orbit: conjugating the least factor must reproduce the set,
  // and the orbit product is G again.
  Poly orbit = quads.front();
  Poly prod = Poly::one(work_tower, kLvlWork);
  for (uint64_t i = 0; i < half; ++i) {
    prod = prod * orbit;
    bool found = false;
    for (auto& qd : quads)
      if (qd == orbit) {
        found = true;
        break;
      }
    require(found, Err::UnexpectedFactorization, "split: factors are not one Galois orbit");
    orbit = orbit.coeff_frobenius(kLvlBase, 1);
  }
  require(prod.section_to(kLvlBase) == G, Err::UnexpectedFactorization,
          "split: conjugate product does not recover the input");
  return {work_tower, std::move(quads)};
}

// ---------------------------------------------------------------------------
// Engine.
// ---------------------------------------------------------------------------

struct DescentOptions {
  uint64_t budget = 8000;        // eliminations per descend() call
  uint64_t max_trials = 0;       // per elimination; 0 -> 64 q^3
  uint64_t lift_trials = 400;    // lift candidates per round
  uint64_t lift_rounds_per_e = 10;  // fresh lifts at one degree before escalating
  uint64_t smooth_rounds = 96;   // multiplicative re-randomizations before lifting
  int threads = 1;
  bool audit_replay = false;     // verify every internal node ledger (slower)
  bool trace = false;            // stderr event log for debugging
};

class DescentEngine {
 public:
  DescentEngine(const FieldRepresentation& rep, uint64_t seed, DescentOptions opts = {})
      : rep_(&rep), fb_(rep), seed_(seed), opts_(opts) {}

  const FactorBase& factor_base() const { return fb_; }
  const DescentStats& last_stats() const { return stats_; }
  const FieldRepresentation& rep() const { return *rep_; }

  // Working tower for an extension of degree m over F_{q^d}: a single fresh
  // level, so Galois conjugation over the base is iterated Frobenius.
  TowerPtr tower_for_degree(uint64_t m) {
    auto it = towers_.find(m);
    if (it != towers_.end()) return it->second;
    Rng rng(sub_seed(seed_, 0x7013e1, m));
    Poly g = random_irreducible(rep_->tower, kLvlBase, (int)m, rng);
    TowerPtr t = rep_->tower->extend(g.c);
    towers_[m] = t;
    return t;
  }

  RelationLedger descend(const Poly& F, uint64_t budget_override = 0) {
    stats_ = DescentStats{};
    budget_left_ = budget_override ? budget_override : opts_.budget;
    Poly F_red = F % rep_->I;
    require(!F_red.is_zero(), Err::ZeroPolynomial, "descend: F vanishes mod I");
    RelationLedger led;
    led.target = F_red;
    led.exps.assign(fb_.size(), 0);
    led.audit = std::make_shared<AuditNode>();
    led.audit->poly = F_red;
    auto fac = factorize(F_red, sub_seed(seed_, 0xfac));
    add_constant(led.exps, fac.unit, 1);
    for (auto& [P, mult] : fac.factors) {
      auto node = resolve_toplevel(P);
      for (size_t i = 0; i < led.exps.size(); ++i) led.exps[i] += mult * (*node->exps)[i];
      led.audit->children.push_back({node, mult});
    }
    require(verify_ledger(*rep_, fb_, led.exps, led.target, rep_->tower->one(kLvlBase)),
            Err::Internal, "descend: final replay failed");
    return led;
  }

 private:
  using Key = std::vector<limb>;

  // A resolution attempt either yields a finished node or names the
  // not-yet-resolved descendants that blocked it.
  struct Attempt {
    std::shared_ptr<AuditNode> node;                  // set on success
    std::vector<std::pair<Key, Poly>> blockers;       // starved, unresolved descendants
    bool starved = false;                             // the attempt itself found no relation
  };

  Key key_of(const Poly& P) const {
    Key k;
    for (auto& c : P.c) k.insert(k.end(), c.begin(), c.end());
    return k;
  }

  static uint64_t hash_key(const Key& k) {
    uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (limb x : k) h = mix64(h ^ x);
    return h;
  }

  void add_constant(std::vector<int64_t>& exps, const Elem& c, int64_t mult) {
    require(!rep_->tower->is_zero(c), Err::Internal, "ledger: zero unit");
    if (rep_->tower->is_one(kLvlBase, c)) return;
    exps[fb_.constant_index(c)] += mult;
  }

  std::shared_ptr<AuditNode> leaf_node(const Poly& P, std::vector<int64_t> exps) {
    auto n = std::make_shared<AuditNode>();
    n->poly = P;
    n->exps = std::make_shared<std::vector<int64_t>>(std::move(exps));
    ++stats_.nodes;
    return n;
  }

  // Factor-base leaves: monic linears, and h1 itself.
  std::optional<std::shared_ptr<AuditNode>> try_leaf(const Poly& P) {
    std::vector<int64_t> exps(fb_.size(), 0);
    if (P.deg() == 1) {
      exps[fb_.monic_linear_index(P.coeff(0))] += 1;
      return leaf_node(P, std::move(exps));
    }
    auto [h1m, h1lc] = rep_->h1.make_monic();
    if (h1m.deg() >= 1 && P == h1m) {
      exps[fb_.h1_index()] += 1;
      add_constant(exps, rep_->tower->inv(kLvlBase, h1lc), 1);
      return leaf_node(P, std::move(exps));
    }
    return std::nullopt;
  }

  bool eliminable_shape(const Poly& P) const {
    if (P.deg() < 2 || (P.deg() & (P.deg() - 1)) != 0) return false;
    return classify_irreducible(P, *rep_) == TrapClass::Good;
  }

  // -------------------------------------------------------------------
  // Worklist resolution. Stuck nodes never recurse into each other; a
  // blocked attempt pushes its blockers onto the agenda and is retried
  // with fresh randomness once they are settled. Progress is monotone:
  // the memo only grows, and blocked work is never unwound.
  // -------------------------------------------------------------------

  std::shared_ptr<AuditNode> resolve_toplevel(const Poly& P0) {
    if (auto leaf = try_leaf(P0)) return *leaf;
    Key key0 = key_of(P0);
    struct NodeState {
      bool in_lift = false;
      bool shape_known = false;
      bool own_shape = false;  // good irreducible of 2-power degree
      uint64_t round = 0;
    };
    std::vector<std::pair<Key, Poly>> agenda{{key0, P0}};
    std::map<Key, NodeState> states;
    uint64_t max_rounds = std::max<uint64_t>(1, opts_.lift_rounds_per_e) *
                          (uint64_t)(lift_max_e(rep_->ell) - lift_min_e(rep_->ell) + 2);
    for (uint64_t step = 0;; ++step) {
      require(step < 100000, Err::DescentFailed, "descend: agenda failed to converge");
      if (agenda.empty()) break;
      auto [key, P] = agenda.back();
      if (memo_.count(key)) {
        agenda.pop_back();
        continue;
      }
      NodeState& st = states[key];
      if (!st.shape_known) {
        st.own_shape = eliminable_shape(P);
        st.shape_known = true;
      }
      if (!st.in_lift && (!st.own_shape || starved_.count(key))) st.in_lift = true;
      Attempt at;
      if (!st.in_lift) {
        // Own-level attempts are deterministic; retrying them after their
        // blockers resolve converges because blocking only points downward
        // in degree.
        at = attempt_own_level(P, key);
        if (at.starved) {
          starved_.insert(key);
          st.in_lift = true;
          continue;
        }
      } else {
        require(st.round < opts_.smooth_rounds + max_rounds, Err::DescentFailed,
                "descend: node of degree " + std::to_string(P.deg()) +
                    " exhausted its re-randomization rounds");
        // Starved pool nodes rescue through cheap smoothing first; nodes
        // without an elimination level of their own (odd degree, traps) take
        // a couple of genuine lift rounds before falling back.
        uint64_t lift_first = st.own_shape ? 0 : 2;
        if (st.round < lift_first) {
          at = attempt_lift(P, st.round);
        } else if (st.round < lift_first + opts_.smooth_rounds) {
          at = attempt_smooth(P, key, st.round - lift_first);
        } else {
          at = attempt_lift(P, st.round - opts_.smooth_rounds);
        }
        if (at.starved) {
          ++st.round;
          continue;
        }
        if (!at.node) ++st.round;  // blocked rounds re-randomize to break cycles
      }
      if (at.node) {
        memo_[key] = at.node;
        agenda.pop_back();
        continue;
      }
      if (opts_.trace)
        std::cerr << "[descent] blocked deg=" << P.deg() << " lift=" << st.in_lift
                  << " round=" << st.round << " blockers=" << at.blockers.size()
                  << " agenda=" << agenda.size() << "\n";
      // Hoist every blocker to the top so it is settled before we retry.
      for (auto& b : at.blockers) {
        for (size_t i = 0; i < agenda.size(); ++i) {
          if (agenda[i].first == b.first) {
            agenda.erase(agenda.begin() + (long)i);
            break;
          }
        }
        agenda.push_back(b);
      }
    }
    auto it = memo_.find(key0);
    require(it != memo_.end(), Err::Internal, "descend: agenda drained without resolving");
    ++stats_.memo_hits;
    auto n = std::make_shared<AuditNode>(*it->second);
    n->from_memo = true;
    return n;
  }

  Attempt attempt_own_level(const Poly& P, const Key& key, size_t max_conjugates = SIZE_MAX) {
    uint64_t m = (uint64_t)P.deg() / 2;  // [K : F_{q^d}]
    TowerPtr work = tower_for_degree(m);
    auto split = split_conjugate_quadratics(P, *rep_, work, sub_seed(seed_, 0x5b117, 0));
    // When the pencil is fully enumerable, one exhausted conjugate settles
    // them all: acceptance counts are Galois-invariant.
    uint64_t trial_cap = opts_.max_trials ? opts_.max_trials : default_max_trials(rep_->q);
    bool provable = work->card_fits_u64(kLvlWork) && work->card_u64(kLvlWork) + 1 <= trial_cap;
    Attempt out;
    size_t tried = 0, exhausted = 0;
    for (size_t ci = 0; ci < split.quads.size() && tried < max_conjugates; ++ci, ++tried) {
      if (budget_left_ == 0)
        fail(Err::BudgetExhausted, "descend: elimination budget exhausted");
      --budget_left_;
      Elimination e;
      try {
        EliminateOptions eo;
        eo.max_trials = opts_.max_trials;
        eo.threads = opts_.threads;
        uint64_t eseed = sub_seed(seed_, 0xe1u, mix64(hash_key(key) + ci));
        e = eliminate_quadratic(split.quads[ci], *rep_, eseed, eo);
        ++stats_.eliminations;
        stats_.elimination_trials += e.trials_used;
      } catch (const Error& err) {
        if (err.code() == Err::TrialsExhausted) {
          ++exhausted;
          if (provable) {
            out.starved = out.blockers.empty();
            return out;
          }
          continue;
        }
        throw;
      }
      auto res = assemble(P, m, e);
      if (res.node) return res;
      for (auto& b : res.blockers) out.blockers.push_back(b);
      // children blocked; the next conjugate gives an independent relation
    }
    out.starved = tried > 0 && exhausted == tried && out.blockers.empty();
    return out;
  }

  // Multiplicative re-randomization: P == T * B^-1 mod I where B is a small
  // product of random monic linears and T = P * B mod I must factor entirely
  // over leaves and already-resolved nodes. Costs one factorization per try.
  Attempt attempt_smooth(const Poly& P, const Key& key, uint64_t round) {
    Poly P_red = P % rep_->I;
    require(!P_red.is_zero(), Err::DescentFailed, "descend: node vanishes mod I");
    ++stats_.smoothing_tries;
    Rng rng(sub_seed(seed_, mix64(hash_key(key) ^ 0x56007), round));
    size_t nb = round == 0 ? 0 : 1 + (size_t)(round % 3);
    std::vector<Elem> bs;
    Poly T = P_red;
    for (size_t i = 0; i < nb; ++i) {
      Elem c(rep_->tower->abs_degree(kLvlBase));
      for (auto& x : c) x = (limb)rng.below(rep_->tower->p());
      bs.push_back(c);
      Poly L(rep_->tower, kLvlBase, {c, rep_->tower->one(kLvlBase)});
      T = (T * L) % rep_->I;
    }
    if (T.is_zero()) return {{}, {}, true};
    auto fac = factorize(T, sub_seed(seed_, 0x57, mix64(hash_key(key) + round)));
    std::vector<int64_t> exps(fb_.size(), 0);
    auto node = std::make_shared<AuditNode>();
    node->poly = P;
    node->smoothed = true;
    add_constant(exps, fac.unit, 1);
    for (auto& [g, mult] : fac.factors) {
      std::shared_ptr<AuditNode> child;
      if (auto leaf = try_leaf(g)) {
        child = *leaf;
      } else {
        Key gk = key_of(g);
        auto it = memo_.find(gk);
        if (it == memo_.end()) return {{}, {}, true};  // not smooth enough; next round
        ++stats_.memo_hits;
        child = std::make_shared<AuditNode>(*it->second);
        child->from_memo = true;
      }
      for (size_t i = 0; i < exps.size(); ++i) exps[i] += (int64_t)mult * (*child->exps)[i];
      node->children.push_back({child, (int64_t)mult});
    }
    for (auto& c : bs) {
      auto leaf = try_leaf(Poly(rep_->tower, kLvlBase, {c, rep_->tower->one(kLvlBase)}));
      exps[fb_.monic_linear_index(c)] -= 1;
      node->children.push_back({*leaf, -1});
    }
    node->exps = std::make_shared<std::vector<int64_t>>(std::move(exps));
    ++stats_.nodes;
    ++stats_.smoothings;
    if (opts_.audit_replay) {
      require(verify_ledger(*rep_, fb_, *node->exps, P, rep_->tower->one(kLvlBase)),
              Err::Internal, "descend: smoothing replay failed");
    }
    return {node, {}, false};
  }

  Attempt attempt_lift(const Poly& P, uint64_t round) {
    Poly P_red = P % rep_->I;
    require(!P_red.is_zero(), Err::DescentFailed, "descend: node vanishes mod I");
    int deg = P.deg();
    int j = 0;
    while ((1 << j) < deg) ++j;
    int e_lo = std::max(lift_min_e(rep_->ell), ((1 << j) == deg) ? j + 1 : j);
    int e_hi = std::max(e_lo, lift_max_e(rep_->ell));
    uint64_t per_e = std::max<uint64_t>(1, opts_.lift_rounds_per_e);
    int e = std::min<int>(e_hi, e_lo + (int)(round / per_e));
    uint64_t lseed = sub_seed(seed_, mix64(hash_key(key_of(P))), (uint64_t)e * 1031 + round);
    auto G = try_lift_at(P_red, *rep_, e, lseed, opts_.lift_trials, &stats_.lift_trials);
    if (opts_.trace)
      std::cerr << "[descent] lift deg=" << P.deg() << " round=" << round << " e=" << e
                << " found=" << G.has_value() << "\n";
    if (!G) return {{}, {}, true};
    ++stats_.lifts;
    stats_.max_lift_e = std::max(stats_.max_lift_e, e);
    // Resolve the lift at its own level only; G's subtree may still block on
    // starved descendants, which bubble up as blockers.
    Key gkey = key_of(*G);
    if (auto it = memo_.find(gkey); it != memo_.end()) {
      auto node = std::make_shared<AuditNode>();
      node->poly = P;
      node->lift_e = e;
      node->children.push_back({it->second, 1});
      node->exps = it->second->exps;
      ++stats_.nodes;
      return {node, {}, false};
    }
    Attempt inner = attempt_own_level(*G, gkey, 2);
    if (inner.starved) return {{}, {}, true};  // unlucky G; next round lifts afresh
    if (!inner.node) return inner;             // pass G's blockers upward
    memo_[gkey] = inner.node;
    auto node = std::make_shared<AuditNode>();
    node->poly = P;
    node->lift_e = e;
    node->children.push_back({inner.node, 1});
    node->exps = inner.node->exps;  // G == P mod I exactly
    ++stats_.nodes;
    if (opts_.audit_replay) {
      require(verify_ledger(*rep_, fb_, *node->exps, P, rep_->tower->one(kLvlBase)),
              Err::Internal, "descend: lift replay failed");
    }
    return {node, {}, false};
  }

  // Build the node for one successful elimination. Children resolve strictly
  // downward (their degrees divide m); any starved, unmemoized descendant is
  // reported as a blocker instead of being lifted in place.
  Attempt assemble(const Poly& P, uint64_t m, const Elimination& e) {
    const TowerPtr& t = e.Q.tw;
    std::vector<int64_t> exps(fb_.size(), 0);
    auto node = std::make_shared<AuditNode>();
    node->poly = P;
    node->elim_degree = m;
    node->trials = e.trials_used;
    Attempt out;
    // P == N(c) * h1^m * N(L0)^-1 * prod N(L_i) mod I.
    exps[fb_.h1_index()] += (int64_t)m;
    FieldElement cK{t, kLvlWork, e.unit};
    add_constant(exps, norm_and_minpoly(cK, kLvlBase).norm.v, 1);
    auto handle = [&](const Poly& overK, int64_t sign) {
      auto [mono, lc] = overK.make_monic();
      FieldElement lcK{t, kLvlWork, lc};
      add_constant(exps, norm_and_minpoly(lcK, kLvlBase).norm.v, sign);
      if (mono.deg() == 0) return;
      Poly nrm = conjugate_norm(mono, kLvlBase);
      Poly nrm_base(rep_->tower, kLvlBase, nrm.c);
      auto fac = factorize(nrm_base, sub_seed(seed_, 0xfa2));
      for (auto& [g, mult] : fac.factors) {
        auto child = resolve_downward(g);
        if (!child.node) {
          for (auto& b : child.blockers) out.blockers.push_back(b);
          continue;
        }
        for (size_t i = 0; i < exps.size(); ++i)
          exps[i] += sign * (int64_t)mult * (*child.node->exps)[i];
        node->children.push_back({child.node, sign * (int64_t)mult});
      }
    };
    handle(e.L0, -1);
    for (auto& l : e.linears) handle(l, +1);
    if (!out.blockers.empty()) return out;
    node->exps = std::make_shared<std::vector<int64_t>>(std::move(exps));
    ++stats_.nodes;
    if (opts_.audit_replay) {
      require(verify_ledger(*rep_, fb_, *node->exps, P, rep_->tower->one(kLvlBase)),
              Err::Internal, "descend: node replay failed");
    }
    out.node = node;
    return out;
  }

  // Strictly descending resolution: leaves, memo hits, and own-level
  // eliminations only. Starved nodes become blockers for the agenda.
  Attempt resolve_downward(const Poly& P) {
    if (auto leaf = try_leaf(P)) return {*leaf, {}, false};
    Key key = key_of(P);
    auto it = memo_.find(key);
    if (it != memo_.end()) {
      ++stats_.memo_hits;
      auto n = std::make_shared<AuditNode>(*it->second);
      n->from_memo = true;
      return {n, {}, false};
    }
    if (!eliminable_shape(P) || starved_.count(key)) {
      return {{}, {{key, P}}, false};
    }
    Attempt at = attempt_own_level(P, key);
    if (at.starved) {
      starved_.insert(key);
      return {{}, {{key, P}}, false};
    }
    if (at.node) {
      memo_[key] = at.node;
      return at;
    }
    return at;  // blocked below; pass the blockers up
  }

  const FieldRepresentation* rep_;
  FactorBase fb_;
  uint64_t seed_;
  DescentOptions opts_;
  DescentStats stats_;
  uint64_t budget_left_ = 0;
  std::map<uint64_t, TowerPtr> towers_;
  std::map<Key, std::shared_ptr<AuditNode>> memo_;
  std::set<Key> starved_;  // proven/declared no usable member at the node's own level
};

}  // namespace podlog
