#pragma once

// Line-oriented `key = value` files with `#` comments. Field elements
// serialize as nested little-endian coefficient lists, innermost level first
// (an F_p value is a bare integer); polynomials are lists of elements.
// Writers emit a canonical byte form so identical data round-trips
// byte-exactly.

#include <cctype>
#include <fstream>
#include <sstream>

#include "podlog/descent.hpp"

namespace podlog {

// ---- nested list text form ------------------------------------------------

namespace io_detail {

struct Cursor {
  const std::string& s;
  size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos;
  }
  char peek() {
    skip_ws();
    require(pos < s.size(), Err::ParseError, "unexpected end of value");
    return s[pos];
  }
  bool done() {
    skip_ws();
    return pos >= s.size();
  }
  void expect(char c) {
    require(peek() == c, Err::ParseError, std::string("expected '") + c + "'");
    ++pos;
  }
  uint64_t integer() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && std::isdigit((unsigned char)s[pos])) ++pos;
    require(pos > start, Err::ParseError, "expected an integer");
    return std::stoull(s.substr(start, pos - start));
  }
};

// Recursive element parse: level 0 is a bare integer, level i a bracket list
// of level i-1 values of length = level degree.
inline Elem parse_elem(Cursor& c, const TowerPtr& t, int lvl) {
  if (lvl == 0) {
    uint64_t v = c.integer();
    require(v < t->p(), Err::ParseError, "coefficient not reduced mod p");
    return Elem{(limb)v};
  }
  c.expect('[');
  RawPoly coeffs;
  uint32_t d = t->level(lvl).degree;
  for (uint32_t i = 0; i < d; ++i) {
    if (i) c.expect(',');
    coeffs.push_back(parse_elem(c, t, lvl - 1));
  }
  c.expect(']');
  return t->join(lvl, coeffs);
}

inline void write_elem(std::ostream& os, const TowerPtr& t, int lvl, const Elem& e) {
  if (lvl == 0) {
    os << e[0];
    return;
  }
  RawPoly ch = t->chunks(lvl, e);
  os << '[';
  for (size_t i = 0; i < ch.size(); ++i) {
    if (i) os << ',';
    write_elem(os, t, lvl - 1, ch[i]);
  }
  os << ']';
}

}  // namespace io_detail

inline std::string elem_to_text(const TowerPtr& t, int lvl, const Elem& e) {
  std::ostringstream os;
  io_detail::write_elem(os, t, lvl, e);
  return os.str();
}

inline Elem elem_from_text(const TowerPtr& t, int lvl, const std::string& s) {
  io_detail::Cursor c{s};
  Elem e = io_detail::parse_elem(c, t, lvl);
  require(c.done(), Err::ParseError, "trailing text after element");
  return e;
}

inline std::string poly_to_text(const Poly& f) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < f.c.size(); ++i) {
    if (i) os << ',';
    io_detail::write_elem(os, f.tw, f.lvl, f.c[i]);
  }
  os << ']';
  return os.str();
}

inline Poly poly_from_text(const TowerPtr& t, int lvl, const std::string& s) {
  io_detail::Cursor c{s};
  c.expect('[');
  RawPoly coeffs;
  if (c.peek() != ']') {
    coeffs.push_back(io_detail::parse_elem(c, t, lvl));
    while (c.peek() == ',') {
      c.expect(',');
      coeffs.push_back(io_detail::parse_elem(c, t, lvl));
    }
  }
  c.expect(']');
  require(c.done(), Err::ParseError, "trailing text after polynomial");
  return Poly(t, lvl, std::move(coeffs));
}

// ---- key = value files ------------------------------------------------------

inline std::map<std::string, std::string> parse_kv_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      size_t e = s.find_last_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    require(!key.empty(), Err::ParseError, "empty key in parameter file");
    require(!kv.count(key), Err::ParseError, "duplicate key: " + key);
    kv[key] = val;
  }
  return kv;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Err::ParseError, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Err::ParseError, "cannot write " + path);
  out << text;
}

// ---- representation files ---------------------------------------------------
//
// Keys: p, q, d, ell, seed, fq (defining polynomial of F_q over F_p), fqd
// (defining polynomial of F_{q^d} over F_q), h0, h1, I.

inline std::string params_to_text(const FieldRepresentation& rep) {
  const TowerPtr& t = rep.tower;
  std::ostringstream os;
  os << "# powers-of-two descent parameters\n";
  os << "p = " << t->p() << "\n";
  os << "q = " << rep.q << "\n";
  os << "d = " << rep.d << "\n";
  os << "ell = " << rep.ell << "\n";
  os << "seed = " << rep.seed << "\n";
  os << "fq = " << poly_to_text(Poly(t, 0, t->level(kLvlQ).defining)) << "\n";
  os << "fqd = " << poly_to_text(Poly(t, kLvlQ, t->level(kLvlBase).defining)) << "\n";
  os << "h0 = " << poly_to_text(rep.h0) << "\n";
  os << "h1 = " << poly_to_text(rep.h1) << "\n";
  os << "I = " << poly_to_text(rep.I) << "\n";
  return os.str();
}

inline FieldRepresentation params_from_text(const std::string& text) {
  auto kv = parse_kv_text(text);
  auto get = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    require(it != kv.end(), Err::ParseError, "missing key: " + k);
    return it->second;
  };
  uint64_t p = std::stoull(get("p"));
  uint64_t q = std::stoull(get("q"));
  uint32_t d = (uint32_t)std::stoul(get("d"));
  uint32_t ell = (uint32_t)std::stoul(get("ell"));
  uint64_t seed = std::stoull(get("seed"));
  auto qf = factor_u64(q);
  require(qf.size() == 1 && qf[0].first == p, Err::ParseError, "q is not a power of p");
  uint32_t a = (uint32_t)qf[0].second;
  TowerPtr t = FieldTower::prime_field(p);
  Poly fq = poly_from_text(t, 0, get("fq"));
  require(fq.deg() == (int)a, Err::ParseError, "fq degree != log_p q");
  t = t->extend(fq.c);
  Poly fqd = poly_from_text(t, kLvlQ, get("fqd"));
  require(fqd.deg() == (int)d, Err::ParseError, "fqd degree != d");
  t = t->extend(fqd.c);
  Poly h0 = poly_from_text(t, kLvlBase, get("h0"));
  Poly h1 = poly_from_text(t, kLvlBase, get("h1"));
  Poly I = poly_from_text(t, kLvlBase, get("I"));
  require(I.deg() == (int)ell, Err::ParseError, "I degree != ell");
  return make_representation(t, q, a, d, h0, h1, I, seed);
}

inline void params_to_file(const FieldRepresentation& rep, const std::string& path) {
  write_file(path, params_to_text(rep));
}

inline FieldRepresentation params_from_file(const std::string& path) {
  return params_from_text(read_file(path));
}

// ---- ledger files -----------------------------------------------------------
//
// Factor-base index table plus nonzero exponent lines plus the unit.

inline std::string ledger_to_text(const FieldRepresentation& rep, const FactorBase& fb,
                                  const RelationLedger& led) {
  std::ostringstream os;
  os << "# powers-of-two descent ledger\n";
  os << "target = " << poly_to_text(led.target) << "\n";
  os << "unit = " << elem_to_text(rep.tower, kLvlBase, rep.tower->one(kLvlBase)) << "\n";
  os << "nbase = " << fb.size() << "\n";
  for (size_t i = 0; i < fb.size(); ++i)
    os << "base " << i << " = " << poly_to_text(fb.entry(i)) << "\n";
  for (size_t i = 0; i < led.exps.size(); ++i)
    if (led.exps[i] != 0) os << "exp " << i << " = " << led.exps[i] << "\n";
  return os.str();
}

struct LedgerFile {
  Poly target;
  Elem unit;
  std::vector<int64_t> exps;
};

inline LedgerFile ledger_from_text(const FieldRepresentation& rep, const std::string& text) {
  const TowerPtr& t = rep.tower;
  FactorBase fb(rep);
  LedgerFile lf;
  lf.exps.assign(fb.size(), 0);
  bool have_target = false, have_unit = false;
  std::istringstream is(text);
  std::string line;
  size_t nbase_seen = 0;
  while (std::getline(is, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      size_t e = s.find_last_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key == "target") {
      lf.target = poly_from_text(t, kLvlBase, val);
      have_target = true;
    } else if (key == "unit") {
      lf.unit = elem_from_text(t, kLvlBase, val);
      have_unit = true;
    } else if (key == "nbase") {
      require(std::stoull(val) == fb.size(), Err::ParseError,
              "ledger: factor base size mismatch");
    } else if (key.rfind("base ", 0) == 0) {
      size_t idx = std::stoull(key.substr(5));
      require(idx < fb.size(), Err::ParseError, "ledger: base index out of range");
      require(poly_from_text(t, kLvlBase, val) == fb.entry(idx), Err::ParseError,
              "ledger: base entry mismatch at index " + std::to_string(idx));
      ++nbase_seen;
    } else if (key.rfind("exp ", 0) == 0) {
      size_t idx = std::stoull(key.substr(4));
      require(idx < fb.size(), Err::ParseError, "ledger: exponent index out of range");
      lf.exps[idx] = std::stoll(val);
    } else {
      fail(Err::ParseError, "ledger: unknown key: " + key);
    }
  }
  require(have_target && have_unit, Err::ParseError, "ledger: missing target or unit");
  require(nbase_seen == fb.size(), Err::ParseError, "ledger: incomplete factor base table");
  return lf;
}

}  // namespace podlog
