#pragma once

#include <gmpxx.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "itercert/errors.hpp"
#include "itercert/interval.hpp"

namespace itercert {

using Rational = mpq_class;
using Exponents = std::vector<unsigned>;

/// A point of C^n given by 64-bit floats.
struct ComplexPoint {
  std::vector<std::complex<double>> coords;

  ComplexPoint() = default;
  explicit ComplexPoint(std::size_t n) : coords(n) {}
  ComplexPoint(std::initializer_list<std::complex<double>> c) : coords(c) {}
  explicit ComplexPoint(std::vector<std::complex<double>> c) : coords(std::move(c)) {}

  std::size_t size() const { return coords.size(); }
  std::complex<double>& operator[](std::size_t i) { return coords[i]; }
  const std::complex<double>& operator[](std::size_t i) const { return coords[i]; }

  bool is_finite() const {
    return std::all_of(coords.begin(), coords.end(),
                       [](auto z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
  }

  friend bool operator==(const ComplexPoint&, const ComplexPoint&) = default;
};

/// Exact rational to [lo, hi] with lo, hi adjacent floats (or equal when exact).
inline RealInterval enclose(const Rational& q) {
  const double d = q.get_d();  // truncates toward zero
  if (!std::isfinite(d)) return d > 0 ? RealInterval{rounding::kMax, rounding::kInf}
                                      : RealInterval{-rounding::kInf, -rounding::kMax};
  const int c = cmp(q, Rational(d));
  if (c == 0) return RealInterval(d);
  if (c > 0) return {d, rounding::next_up(d)};
  return {rounding::next_down(d), d};
}

/// Exact rational rounded to the nearest float (ties to even).
inline double nearest(const Rational& q) {
  const RealInterval e = enclose(q);
  if (e.is_point() || !e.is_finite()) return std::abs(e.lo) < std::abs(e.hi) ? e.lo : e.hi;
  const Rational below = q - Rational(e.lo);
  const Rational above = Rational(e.hi) - q;
  const int c = cmp(below, above);
  if (c < 0) return e.lo;
  if (c > 0) return e.hi;
  std::int64_t bits = 0;
  std::memcpy(&bits, &e.lo, sizeof bits);
  return (bits & 1) == 0 ? e.lo : e.hi;
}

/// Sparse multivariate polynomial with exact rational coefficients.
/// Invariant: no stored coefficient is zero.
class Polynomial {
 public:
  // Graded order: higher total degree first, then lexicographically larger.
  struct MonomialOrder {
    bool operator()(const Exponents& a, const Exponents& b) const {
      const auto da = std::accumulate(a.begin(), a.end(), 0u);
      const auto db = std::accumulate(b.begin(), b.end(), 0u);
      if (da != db) return da > db;
      return a > b;
    }
  };
  using TermMap = std::map<Exponents, Rational, MonomialOrder>;

  Polynomial() = default;
  explicit Polynomial(std::size_t n_vars) : n_vars_(n_vars) {}

  std::size_t n_vars() const { return n_vars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Exponents& e, const Rational& c) {
    if (e.size() != n_vars_) throw DimensionError("monomial has the wrong number of exponents");
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  unsigned degree() const {
    unsigned d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, std::accumulate(e.begin(), e.end(), 0u));
    return d;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.n_vars_ == b.n_vars_ && a.terms_ == b.terms_;
  }

 private:
  std::size_t n_vars_ = 0;
  TermMap terms_;
};

/// Square polynomial system f_1..f_n in x1..xn. Immutable after construction;
/// float and interval images of all coefficients (and of the Jacobian
/// entries) are cached once.
class PolynomialSystem {
 public:
  struct NumericTerm {
    Exponents exponents;
    double nearest = 0.0;
    RealInterval enclosure;
  };
  using NumericPoly = std::vector<NumericTerm>;

  PolynomialSystem() = default;

  explicit PolynomialSystem(std::vector<Polynomial> polys) : polys_(std::move(polys)) {
    n_ = polys_.size();
    if (n_ == 0) throw DimensionError("a polynomial system needs at least one polynomial");
    for (const auto& p : polys_) {
      if (p.n_vars() != n_) throw DimensionError("system is not square");
      max_degree_ = std::max(max_degree_, p.degree());
    }
    numeric_.reserve(n_);
    jacobian_.assign(n_ * n_, {});
    for (std::size_t i = 0; i < n_; ++i) {
      NumericPoly np;
      for (const auto& [e, c] : polys_[i].terms()) np.push_back({e, nearest(c), enclose(c)});
      numeric_.push_back(std::move(np));
      for (std::size_t j = 0; j < n_; ++j) {
        NumericPoly& dp = jacobian_[i * n_ + j];
        for (const auto& [e, c] : polys_[i].terms()) {
          if (e[j] == 0) continue;
          Exponents de = e;
          --de[j];
          const Rational dc = c * e[j];
          dp.push_back({std::move(de), nearest(dc), enclose(dc)});
        }
      }
    }
  }

  std::size_t n_vars() const { return n_; }
  unsigned max_degree() const { return max_degree_; }
  const std::vector<Polynomial>& polys() const { return polys_; }
  const Polynomial& operator[](std::size_t i) const { return polys_[i]; }

  const NumericPoly& numeric(std::size_t i) const { return numeric_[i]; }
  /// Cached d f_i / d x_j.
  const NumericPoly& derivative(std::size_t i, std::size_t j) const { return jacobian_[i * n_ + j]; }

  friend bool operator==(const PolynomialSystem& a, const PolynomialSystem& b) { return a.polys_ == b.polys_; }

 private:
  std::size_t n_ = 0;
  unsigned max_degree_ = 0;
  std::vector<Polynomial> polys_;
  std::vector<NumericPoly> numeric_;
  std::vector<NumericPoly> jacobian_;
};

// ---------------------------------------------------------------------------
// System file format
//
//   # comment
//   vars: 2
//   x1^2 - 1
//   3/2 * x1 * x2^2 - x2 + 7
//
// The `vars:` header is optional; without it the number of polynomials fixes n.

namespace detail {

class LineParser {
 public:
  LineParser(std::string_view text, std::size_t line_no) : text_(text), line_(line_no) {}

  // Returns (exponent map, coefficient) terms of one polynomial line.
  std::vector<std::pair<std::map<unsigned, unsigned>, Rational>> parse_polynomial() {
    std::vector<std::pair<std::map<unsigned, unsigned>, Rational>> terms;
    skip_ws();
    bool negative = false;
    if (peek() == '+' || peek() == '-') {
      negative = get() == '-';
      skip_ws();
    }
    while (true) {
      auto term = parse_term();
      if (negative) term.second = -term.second;
      terms.push_back(std::move(term));
      skip_ws();
      if (at_end()) break;
      const char op = peek();
      if (op != '+' && op != '-') fail("expected '+', '-' or '*'");
      get();
      negative = op == '-';
      skip_ws();
    }
    return terms;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, pos_ + 1, what); }

 private:
  std::pair<std::map<unsigned, unsigned>, Rational> parse_term() {
    std::map<unsigned, unsigned> powers;
    Rational coeff = 1;
    bool first = true;
    while (true) {
      skip_ws();
      if (!first) {
        if (peek() != '*') break;
        get();
        skip_ws();
      }
      first = false;
      const char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        coeff *= parse_number();
      } else if (c == 'x') {
        const auto [var, power] = parse_variable();
        powers[var] += power;
      } else if (at_end()) {
        fail("unexpected end of line");
      } else {
        fail(std::string("unexpected character '") + c + "'");
      }
    }
    return {std::move(powers), coeff};
  }

  Rational parse_number() {
    std::string digits = take_digits();
    Rational value;
    if (peek() == '.') {
      get();
      std::string frac = take_digits();
      if (frac.empty()) fail("expected digits after '.'");
      mpz_class num(digits + frac);
      mpz_class den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
      value = Rational(num, den);
    } else {
      value = Rational(mpz_class(digits), 1);
    }
    skip_ws();
    if (peek() == '/') {
      get();
      skip_ws();
      const std::size_t den_pos = pos_;
      std::string den = take_digits();
      if (den.empty()) fail("expected an integer denominator");
      mpz_class d(den);
      if (d == 0) {
        pos_ = den_pos;
        fail("zero denominator");
      }
      value /= Rational(d, 1);
    }
    value.canonicalize();
    return value;
  }

  std::pair<unsigned, unsigned> parse_variable() {
    get();  // 'x'
    const std::size_t at = pos_;
    std::string idx = take_digits();
    if (idx.empty()) fail("expected a variable index after 'x'");
    const unsigned long var = std::stoul(idx);
    if (var == 0) {
      pos_ = at;
      fail("unknown variable x0 (variables are x1..xn)");
    }
    unsigned power = 1;
    skip_ws();
    if (peek() == '^') {
      get();
      skip_ws();
      std::string p = take_digits();
      if (p.empty()) fail("expected an integer exponent");
      power = static_cast<unsigned>(std::stoul(p));
    }
    return {static_cast<unsigned>(var), power};
  }

  std::string take_digits() {
    std::string out;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) out.push_back(get());
    return out;
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  char get() { return text_[pos_++]; }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

inline std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  if (hash != std::string_view::npos) line = line.substr(0, hash);
  return line;
}

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

}  // namespace detail

/// Parse the text system format. Throws ParseError on malformed input,
/// unknown variables, zero denominators, or a non-square system.
inline PolynomialSystem parse_system(std::string_view text) {
  struct RawLine {
    std::size_t line_no;
    std::vector<std::pair<std::map<unsigned, unsigned>, Rational>> terms;
  };
  std::vector<RawLine> raw;
  std::optional<std::size_t> declared;
  std::size_t line_no = 0;
  std::size_t last_line = 1;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::string_view body = detail::strip_comment(line);
    if (detail::is_blank(body)) continue;
    last_line = line_no;
    const auto first = body.find_first_not_of(" \t");
    if (body.substr(first).starts_with("vars")) {
      if (declared || !raw.empty()) throw ParseError(line_no, first + 1, "'vars:' must be the first declaration");
      const auto colon = body.find(':', first);
      if (colon == std::string_view::npos) throw ParseError(line_no, first + 5, "expected ':' after 'vars'");
      std::string count(body.substr(colon + 1));
      count.erase(std::remove_if(count.begin(), count.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }),
                  count.end());
      if (count.empty() || !std::all_of(count.begin(), count.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        throw ParseError(line_no, colon + 2, "expected a positive integer variable count");
      declared = std::stoul(count);
      if (*declared == 0) throw ParseError(line_no, colon + 2, "variable count must be positive");
      continue;
    }
    detail::LineParser parser(body, line_no);
    raw.push_back({line_no, parser.parse_polynomial()});
  }

  const std::size_t n = declared.value_or(raw.size());
  if (raw.size() != n)
    throw ParseError(last_line, 1,
                     "non-square system: " + std::to_string(raw.size()) + " polynomials in " + std::to_string(n) + " variables");
  if (n == 0) throw ParseError(last_line, 1, "empty system");

  std::vector<Polynomial> polys;
  for (const auto& line : raw) {
    Polynomial p(n);
    for (const auto& [powers, coeff] : line.terms) {
      Exponents e(n, 0);
      for (const auto& [var, power] : powers) {
        if (var > n)
          throw ParseError(line.line_no, 1, "unknown variable x" + std::to_string(var) + " in a system of " +
                                               std::to_string(n) + " variables");
        e[var - 1] += power;
      }
      p.add_term(e, coeff);
    }
    polys.push_back(std::move(p));
  }
  return PolynomialSystem(std::move(polys));
}

inline std::string format_polynomial(const Polynomial& p) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : p.terms()) {
    const bool neg = c < 0;
    const Rational mag = abs(c);
    if (first) {
      if (neg) os << '-';
    } else {
      os << (neg ? " - " : " + ");
    }
    first = false;
    const bool constant = std::all_of(e.begin(), e.end(), [](unsigned a) { return a == 0; });
    bool need_star = false;
    if (constant || mag != 1) {
      os << mag.get_str();
      need_star = true;
    }
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (e[j] == 0) continue;
      if (need_star) os << " * ";
      os << 'x' << (j + 1);
      if (e[j] > 1) os << '^' << e[j];
      need_star = true;
    }
  }
  return os.str();
}

/// Inverse of parse_system.
inline std::string format_system(const PolynomialSystem& f) {
  std::ostringstream os;
  os << "vars: " << f.n_vars() << '\n';
  for (const auto& p : f.polys()) os << format_polynomial(p) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Float evaluation

namespace detail {

inline void require_dim(const PolynomialSystem& f, std::size_t n) {
  if (f.n_vars() != n) throw DimensionError("point dimension does not match the system");
}

template <typename T>
T power(const T& x, unsigned e, const T& one) {
  T acc = one;
  for (unsigned i = 0; i < e; ++i) acc = acc * x;
  return acc;
}

inline std::complex<double> eval_numeric(const PolynomialSystem::NumericPoly& p, const ComplexPoint& x) {
  std::complex<double> sum = 0.0;
  for (const auto& t : p) {
    std::complex<double> m = t.nearest;
    for (std::size_t j = 0; j < t.exponents.size(); ++j)
      for (unsigned r = 0; r < t.exponents[j]; ++r) m *= x[j];
    sum += m;
  }
  return sum;
}

}  // namespace detail

/// F(p) in double precision (coefficients rounded to nearest).
inline std::vector<std::complex<double>> evaluate(const PolynomialSystem& f, const ComplexPoint& p) {
  detail::require_dim(f, p.size());
  std::vector<std::complex<double>> out(f.n_vars());
  for (std::size_t i = 0; i < f.n_vars(); ++i) out[i] = detail::eval_numeric(f.numeric(i), p);
  return out;
}

inline Eigen::MatrixXcd jacobian_at(const PolynomialSystem& f, const ComplexPoint& p) {
  detail::require_dim(f, p.size());
  const std::size_t n = f.n_vars();
  Eigen::MatrixXcd jac(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = detail::eval_numeric(f.derivative(i, j), p);
  return jac;
}

// ---------------------------------------------------------------------------
// Taylor data

/// Degree-`order` homogeneous part of f_i(p + y), for every i, as enclosures.
struct TaylorData {
  struct Coefficient {
    Exponents exponents;
    ComplexInterval value;
  };
  unsigned order = 0;
  std::vector<std::vector<Coefficient>> entries;  // one list per polynomial

  bool empty() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.empty(); });
  }
};

/// All Taylor orders 0..max_degree of F at p in one pass. Order 0 holds F(p),
/// order 1 holds Jac_F(p); higher orders hold D^kF(p)/k!.
///
/// p is a float point and therefore an exact dyadic rational, so the
/// expansion f(p+y) = sum_a c_a prod_j (p_j + y_j)^{a_j} is evaluated
/// coefficientwise in outward-rounded interval arithmetic from the rational
/// coefficient enclosures; every output contains the exact value.
inline std::vector<TaylorData> taylor_expansion(const PolynomialSystem& f, const ComplexPoint& p) {
  detail::require_dim(f, p.size());
  const std::size_t n = f.n_vars();
  const unsigned max_deg = f.max_degree();

  // powers[j][e] = p_j^e (exact point start, enclosed thereafter)
  std::vector<std::vector<ComplexInterval>> powers(n);
  for (std::size_t j = 0; j < n; ++j) {
    powers[j].push_back(ComplexInterval(1.0));
    for (unsigned e = 1; e <= max_deg; ++e) powers[j].push_back(powers[j].back() * ComplexInterval(p[j]));
  }
  // binom[a][b], exact in double for the degrees we handle
  std::vector<std::vector<double>> binom(max_deg + 1);
  for (unsigned a = 0; a <= max_deg; ++a) {
    binom[a].assign(a + 1, 1.0);
    for (unsigned b = 1; b < a; ++b) binom[a][b] = binom[a - 1][b - 1] + binom[a - 1][b];
  }

  std::vector<TaylorData> out(max_deg + 1);
  for (unsigned k = 0; k <= max_deg; ++k) {
    out[k].order = k;
    out[k].entries.resize(n);
  }

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::map<Exponents, ComplexInterval>> acc(max_deg + 1);
    for (const auto& t : f.numeric(i)) {
      Exponents b(n, 0);
      // enumerate all b <= a
      std::function<void(std::size_t, unsigned, ComplexInterval)> walk = [&](std::size_t j, unsigned deg,
                                                                              ComplexInterval partial) {
        if (j == n) {
          auto [it, inserted] = acc[deg].try_emplace(b, partial);
          if (!inserted) it->second += partial;
          return;
        }
        const unsigned a = t.exponents[j];
        for (unsigned bj = 0; bj <= a; ++bj) {
          b[j] = bj;
          ComplexInterval factor = powers[j][a - bj];
          if (binom[a][bj] != 1.0) factor = RealInterval(binom[a][bj]) * factor;
          walk(j + 1, deg + bj, partial * factor);
        }
        b[j] = 0;
      };
      walk(0, 0, ComplexInterval(t.enclosure, RealInterval(0.0)));
    }
    for (unsigned k = 0; k <= max_deg; ++k)
      for (auto& [e, v] : acc[k]) out[k].entries[i].push_back({e, v});
  }
  return out;
}

/// Degree-k Taylor coefficients of F at p (k >= 2); empty when k > max_degree.
inline TaylorData taylor_at(const PolynomialSystem& f, const ComplexPoint& p, unsigned k) {
  detail::require_dim(f, p.size());
  if (k < 2) throw DimensionError("taylor_at expects an order k >= 2");
  if (k > f.max_degree()) {
    TaylorData empty;
    empty.order = k;
    empty.entries.resize(f.n_vars());
    return empty;
  }
  return std::move(taylor_expansion(f, p)[k]);
}

}  // namespace itercert
