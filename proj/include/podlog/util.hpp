#pragma once

// Shared utilities: error codes, deterministic RNG, 64-bit modular helpers,
// and a chunked parallel-for used by the enumeration surveys.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace podlog {

enum class Err {
  NotPrime,
  DegreeZero,
  LevelMismatch,
  DivisionByZero,
  NotInSubfield,
  ZeroPolynomial,
  ConstantPolynomial,
  NotIrreducible,
  SearchExhausted,
  KernelDimensionNot2,
  NotIrreducibleQuadratic,
  DegenerateTrap,
  BothSpecialVanish,
  TrapInput,
  PencilDegenerate,
  TrialsExhausted,
  LiftExhausted,
  UnexpectedFactorization,
  DescentFailed,
  BudgetExhausted,
  SingularSystem,
  NotInSubgroup,
  TooLarge,
  ParseError,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Err code, const std::string& what) {
  if (!ok) fail(code, what);
}

// ---------------------------------------------------------------------------
// Deterministic RNG (SplitMix64). Substreams are derived by hashing the seed
// with a tag, so trial/row workers can be evaluated in any order without
// changing results.
// ---------------------------------------------------------------------------

inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t sub_seed(uint64_t seed, uint64_t tag) {
  return mix64(seed + 0x9e3779b97f4a7c15ULL * (tag + 1));
}

inline uint64_t sub_seed(uint64_t seed, uint64_t tag1, uint64_t tag2) {
  return sub_seed(sub_seed(seed, tag1), tag2);
}

struct Rng {
  uint64_t state;

  explicit Rng(uint64_t seed) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    return mix64(z);
  }

  // Uniform in [0, n) by rejection.
  uint64_t below(uint64_t n) {
    if (n <= 1) return 0;
    uint64_t lim = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = next();
    } while (v >= lim);
    return v % n;
  }

  bool coin() { return next() & 1; }
};

// ---------------------------------------------------------------------------
// 64-bit modular arithmetic, primality, factoring (desk-scale group orders).
// ---------------------------------------------------------------------------

inline uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m) {
  return (uint64_t)((unsigned __int128)a * b % m);
}

inline uint64_t powmod_u64(uint64_t a, uint64_t e, uint64_t m) {
  uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod_u64(r, a, m);
    a = mulmod_u64(a, a, m);
    e >>= 1;
  }
  return r;
}

inline uint64_t modinv_u64(uint64_t a, uint64_t m) {
  int64_t t = 0, nt = 1;
  int64_t r = (int64_t)m, nr = (int64_t)(a % m);
  while (nr != 0) {
    int64_t qq = r / nr;
    int64_t tmp = t - qq * nt;
    t = nt;
    nt = tmp;
    tmp = r - qq * nr;
    r = nr;
    nr = tmp;
  }
  require(r == 1, Err::DivisionByZero, "modinv: not invertible");
  return (uint64_t)(t < 0 ? t + (int64_t)m : t);
}

inline bool is_prime_u64(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t s : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % s == 0) return n == s;
  }
  uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  for (uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    uint64_t x = powmod_u64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int i = 1; i < r; ++i) {
      x = mulmod_u64(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

inline uint64_t pollard_rho_u64(uint64_t n) {
  if ((n & 1) == 0) return 2;
  for (uint64_t c = 1;; ++c) {
    auto f = [&](uint64_t x) { return (mulmod_u64(x, x, n) + c) % n; };
    uint64_t x = 2, y = 2, d = 1;
    while (d == 1) {
      x = f(x);
      y = f(f(y));
      uint64_t diff = x > y ? x - y : y - x;
      d = std::gcd(diff, n);
    }
    if (d != n) return d;
  }
}

// Sorted (prime, exponent) factorization of n >= 1.
inline std::vector<std::pair<uint64_t, int>> factor_u64(uint64_t n) {
  std::vector<uint64_t> primes;
  std::vector<uint64_t> stack{n};
  while (!stack.empty()) {
    uint64_t m = stack.back();
    stack.pop_back();
    if (m == 1) continue;
    if (is_prime_u64(m)) {
      primes.push_back(m);
      continue;
    }
    for (uint64_t d = 2; d < 100000 && d * d <= m; ++d) {
      while (m % d == 0) {
        primes.push_back(d);
        m /= d;
      }
    }
    if (m == 1) continue;
    if (is_prime_u64(m)) {
      primes.push_back(m);
      continue;
    }
    uint64_t d = pollard_rho_u64(m);
    stack.push_back(d);
    stack.push_back(m / d);
  }
  std::sort(primes.begin(), primes.end());
  std::vector<std::pair<uint64_t, int>> out;
  for (uint64_t q : primes) {
    if (!out.empty() && out.back().first == q)
      out.back().second++;
    else
      out.push_back({q, 1});
  }
  return out;
}

// base^exp, or nullopt on u64 overflow.
inline std::optional<uint64_t> checked_pow_u64(uint64_t base, uint64_t exp) {
  unsigned __int128 r = 1;
  for (uint64_t i = 0; i < exp; ++i) {
    r *= base;
    if (r > UINT64_MAX) return std::nullopt;
  }
  return (uint64_t)r;
}

// ---------------------------------------------------------------------------
// Chunked parallel execution. Work is split into contiguous index ranges and
// results must be written to index-addressed slots, so the outcome does not
// depend on the thread count.
// ---------------------------------------------------------------------------

inline void parallel_ranges(uint64_t n, int threads,
                            const std::function<void(uint64_t, uint64_t)>& body) {
  if (n == 0) return;
  if (threads <= 1 || n < 64) {
    body(0, n);
    return;
  }
  uint64_t nt = std::min<uint64_t>((uint64_t)threads, n);
  uint64_t chunk = (n + nt - 1) / nt;
  std::vector<std::thread> pool;
  std::exception_ptr eptr = nullptr;
  std::mutex mu;
  for (uint64_t t = 0; t < nt; ++t) {
    uint64_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi]() {
      try {
        body(lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> g(mu);
        if (!eptr) eptr = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (eptr) std::rethrow_exception(eptr);
}

}  // namespace podlog
