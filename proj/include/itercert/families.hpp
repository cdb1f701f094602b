#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "itercert/errors.hpp"
#include "itercert/poly.hpp"
#include "itercert/rng.hpp"
#include "itercert/stream.hpp"

namespace itercert {

struct ExactComplex {
  Rational re;
  Rational im;
  bool is_real() const { return im == 0; }
  friend bool operator==(const ExactComplex&, const ExactComplex&) = default;
};

inline ExactComplex operator+(const ExactComplex& a, const ExactComplex& b) { return {a.re + b.re, a.im + b.im}; }
inline ExactComplex operator*(const Rational& a, const ExactComplex& b) { return {a * b.re, a * b.im}; }
inline ExactComplex operator*(const ExactComplex& a, const ExactComplex& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

/// Monic univariate factor given by its roots (closed under conjugation).
struct Factor {
  std::vector<ExactComplex> roots;

  static Factor real_pair(const Rational& a, const Rational& b) { return {{{a, 0}, {b, 0}}}; }
  static Factor complex_pair(const Rational& p, const Rational& q) { return {{{p, q}, {p, -q}}}; }
  static Factor cubic(const Rational& r, const Rational& p, const Rational& q) { return {{{r, 0}, {p, q}, {p, -q}}}; }

  std::size_t degree() const { return roots.size(); }

  /// Coefficients c_0..c_deg of prod (y - root).
  std::vector<Rational> coefficients() const {
    std::vector<ExactComplex> c{{1, 0}};
    for (const auto& r : roots) {
      std::vector<ExactComplex> next(c.size() + 1, ExactComplex{0, 0});
      for (std::size_t i = 0; i < c.size(); ++i) {
        next[i + 1] = next[i + 1] + c[i];
        next[i] = next[i] + ExactComplex{-1, 0} * (c[i] * r);
      }
      c = std::move(next);
    }
    std::vector<Rational> out;
    for (const auto& z : c) {
      if (z.im != 0) throw DomainError("factor roots are not closed under conjugation");
      out.push_back(z.re);
    }
    return out;
  }
};

// ---------------------------------------------------------------------------

/// Re(x1) = 0, 1, ..., d-1; every other coordinate and all imaginary parts 0.
class GridFamily {
 public:
  GridFamily(std::size_t d, std::size_t n) : d_(d), n_(n) {
    if (n == 0) throw DomainError("grid family needs n >= 1");
  }
  std::size_t size() const { return d_; }
  std::size_t dim() const { return n_; }
  void point(std::size_t i, ComplexPoint& out) const {
    out = ComplexPoint(n_);
    out[0] = {static_cast<double>(i), 0.0};
  }
  std::unique_ptr<SolutionStream> stream() const {
    const GridFamily self = *this;
    return std::make_unique<GeneratorStream>(d_, n_, [self](std::size_t i, ComplexPoint& p) { self.point(i, p); });
  }

 private:
  std::size_t d_;
  std::size_t n_;
};

/// Product system with closed-form roots:
///   f_1 = g_1(x_1 - sum_{j>1} w_j x_j),  f_j = g_j(x_j) for j > 1,
/// so a root is x_j = y_j (j > 1), x_1 = y_1 + sum w_j y_j for roots y_j of g_j.
/// Root index i enumerates (y_1, ..., y_n) in mixed radix, coordinate 1 fastest.
/// Candidates are the rounded root plus seeded noise, then 6 float Newton steps.
class ProductFamily {
 public:
  static constexpr int kNewtonSteps = 6;

  ProductFamily(std::vector<Factor> factors, std::vector<Rational> weights, std::uint64_t seed = 1,
                double noise = 1e-9)
      : factors_(std::move(factors)), weights_(std::move(weights)), seed_(seed), noise_(noise) {
    const std::size_t n = factors_.size();
    if (n == 0) throw DomainError("product family needs at least one factor");
    if (weights_.empty()) weights_.assign(n, Rational(0));
    if (weights_.size() != n) throw DimensionError("product family: one weight per factor expected");
    d_ = 1;
    for (const auto& f : factors_) {
      if (f.degree() == 0) throw DomainError("product family: constant factor");
      d_ *= f.degree();
    }
    system_ = std::make_shared<const PolynomialSystem>(build_system());
  }

  /// Random factors: kinds holds one of 'r' (real pair), 'c' (complex pair),
  /// 't' (cubic: one real root and a complex pair) per coordinate. Real parts
  /// are multiples of 1/64 in [-4, 4], weights are integers in {1, 2, 3}.
  static ProductFamily random(std::string_view kinds, std::uint64_t seed, double noise = 1e-9) {
    SplitMix64 rng(SplitMix64::hash(seed, 0xFAC7));
    auto grid = [&](int lo, int hi) {  // multiple of 1/64 in [lo/64, hi/64]
      return Rational(static_cast<long>(lo + static_cast<long>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)))), 64);
    };
    auto distinct_real = [&](const Rational& avoid) {
      Rational r;
      do r = grid(-256, 256);
      while (abs(r - avoid) < Rational(1, 8));
      return r;
    };
    std::vector<Factor> factors;
    std::vector<Rational> weights;
    for (std::size_t j = 0; j < kinds.size(); ++j) {
      const Rational a = grid(-256, 256);
      switch (kinds[j]) {
        case 'r': factors.push_back(Factor::real_pair(a, distinct_real(a))); break;
        case 'c': factors.push_back(Factor::complex_pair(a, grid(16, 128))); break;
        case 't': factors.push_back(Factor::cubic(distinct_real(a), a, grid(16, 128))); break;
        default: throw UsageError("unknown factor kind '" + std::string(1, kinds[j]) + "'");
      }
      weights.push_back(j == 0 ? Rational(0) : Rational(static_cast<long>(1 + rng.below(3))));
    }
    return ProductFamily(std::move(factors), std::move(weights), seed, noise);
  }

  std::size_t size() const { return d_; }
  std::size_t dim() const { return factors_.size(); }
  const std::vector<Factor>& factors() const { return factors_; }
  const std::vector<Rational>& weights() const { return weights_; }
  const PolynomialSystem& system() const { return *system_; }
  std::shared_ptr<const PolynomialSystem> system_ptr() const { return system_; }

  std::vector<std::size_t> digits(std::size_t index) const {
    if (index >= d_) throw DomainError("root index out of range");
    std::vector<std::size_t> out(factors_.size());
    for (std::size_t j = 0; j < factors_.size(); ++j) {
      out[j] = index % factors_[j].degree();
      index /= factors_[j].degree();
    }
    return out;
  }

  std::vector<ExactComplex> exact_root(std::size_t index) const {
    const auto dig = digits(index);
    std::vector<ExactComplex> x(factors_.size());
    x[0] = factors_[0].roots[dig[0]];
    for (std::size_t j = 1; j < factors_.size(); ++j) {
      x[j] = factors_[j].roots[dig[j]];
      x[0] = x[0] + weights_[j] * x[j];
    }
    return x;
  }

  bool root_is_real(std::size_t index) const {
    const auto dig = digits(index);
    for (std::size_t j = 0; j < factors_.size(); ++j)
      if (!factors_[j].roots[dig[j]].is_real()) return false;
    return true;
  }

  std::size_t real_count() const {
    std::size_t c = 1;
    for (const auto& f : factors_)
      c *= static_cast<std::size_t>(std::count_if(f.roots.begin(), f.roots.end(), [](const auto& r) { return r.is_real(); }));
    return c;
  }

  void candidate(std::size_t index, ComplexPoint& out) const {
    const auto x = exact_root(index);
    const std::size_t n = x.size();
    out = ComplexPoint(n);
    for (std::size_t j = 0; j < n; ++j) {
      SplitMix64 rng(SplitMix64::hash(seed_, index, j));
      const double re = nearest(x[j].re);
      const double im = nearest(x[j].im);
      const double scale = noise_ * (1.0 + std::abs(re) + std::abs(im));
      out[j] = {re + (2 * rng.uniform() - 1) * scale, im + (2 * rng.uniform() - 1) * scale};
    }
    newton(out);
  }

  std::unique_ptr<SolutionStream> stream() const {
    auto self = std::make_shared<const ProductFamily>(*this);
    return std::make_unique<GeneratorStream>(d_, dim(), [self](std::size_t i, ComplexPoint& p) { self->candidate(i, p); });
  }

  std::vector<ComplexPoint> candidates() const {
    std::vector<ComplexPoint> out(d_);
    for (std::size_t i = 0; i < d_; ++i) candidate(i, out[i]);
    return out;
  }

 private:
  void newton(ComplexPoint& x) const {
    const auto n = static_cast<Eigen::Index>(x.size());
    for (int step = 0; step < kNewtonSteps; ++step) {
      const auto fx = evaluate(*system_, x);
      Eigen::VectorXcd v(n);
      for (Eigen::Index i = 0; i < n; ++i) v(i) = fx[static_cast<std::size_t>(i)];
      const Eigen::VectorXcd dx = jacobian_at(*system_, x).partialPivLu().solve(v);
      if (!dx.allFinite()) return;
      for (Eigen::Index i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] -= dx(i);
    }
  }

  PolynomialSystem build_system() const {
    const std::size_t n = factors_.size();
    std::vector<Polynomial> polys;
    // f_1: sum_k c_k L^k with L = x_1 - sum w_j x_j, expanded term by term.
    {
      std::map<Exponents, Rational> acc;
      std::map<Exponents, Rational> power{{Exponents(n, 0), Rational(1)}};
      const auto coeffs = factors_[0].coefficients();
      for (std::size_t k = 0; k < coeffs.size(); ++k) {
        for (const auto& [e, c] : power) acc[e] += coeffs[k] * c;
        std::map<Exponents, Rational> next;
        for (const auto& [e, c] : power)
          for (std::size_t j = 0; j < n; ++j) {
            const Rational w = j == 0 ? Rational(1) : Rational(-weights_[j]);
            if (w == 0) continue;
            Exponents e2 = e;
            ++e2[j];
            next[e2] += c * w;
          }
        power = std::move(next);
      }
      Polynomial p(n);
      for (const auto& [e, c] : acc) p.add_term(e, c);
      polys.push_back(std::move(p));
    }
    for (std::size_t j = 1; j < n; ++j) {
      Polynomial p(n);
      const auto coeffs = factors_[j].coefficients();
      for (std::size_t k = 0; k < coeffs.size(); ++k) {
        Exponents e(n, 0);
        e[j] = static_cast<unsigned>(k);
        p.add_term(e, coeffs[k]);
      }
      polys.push_back(std::move(p));
    }
    return PolynomialSystem(std::move(polys));
  }

  std::vector<Factor> factors_;
  std::vector<Rational> weights_;
  std::uint64_t seed_;
  double noise_;
  std::size_t d_ = 1;
  std::shared_ptr<const PolynomialSystem> system_;
};

// ---------------------------------------------------------------------------
// Generator spec strings, e.g. "grid:d=4,n=1", "product:a=1..10,seed=7",
// "product:kinds=rrcc,seed=3". Lists use ".." ranges or '|' separators.

namespace detail {

inline Rational parse_rational_token(std::string_view s) {
  try {
    return Rational(std::string(s));
  } catch (const std::invalid_argument&) {
    throw UsageError("bad number '" + std::string(s) + "' in generator spec");
  }
}

inline std::uint64_t parse_uint(std::string_view s, std::string_view key) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw UsageError("bad integer for '" + std::string(key) + "' in generator spec");
  return v;
}

inline std::vector<Rational> parse_list(std::string_view s) {
  std::vector<Rational> out;
  if (const auto dots = s.find(".."); dots != std::string_view::npos) {
    const auto lo = parse_uint(s.substr(0, dots), "a");
    const auto hi = parse_uint(s.substr(dots + 2), "a");
    if (lo > hi) throw UsageError("empty range in generator spec");
    for (auto v = lo; v <= hi; ++v) out.emplace_back(static_cast<unsigned long>(v));
    return out;
  }
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto bar = s.find('|', start);
    const auto tok = s.substr(start, bar == std::string_view::npos ? s.npos : bar - start);
    out.push_back(parse_rational_token(tok));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return out;
}

}  // namespace detail

struct GeneratorSpec {
  std::string family;
  std::map<std::string, std::string, std::less<>> params;

  static GeneratorSpec parse(std::string_view text) {
    GeneratorSpec spec;
    const auto colon = text.find(':');
    spec.family = std::string(text.substr(0, colon));
    if (colon == std::string_view::npos) return spec;
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = rest.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos || eq == 0)
        throw UsageError("expected key=value in generator spec, got '" + std::string(item) + "'");
      spec.params[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    return spec;
  }
};

/// Stream plus the system it came from (the grid family has none).
struct GeneratedInput {
  std::unique_ptr<SolutionStream> stream;
  std::shared_ptr<const PolynomialSystem> system;
  std::shared_ptr<const ProductFamily> product;
};

/// "product" keys: a=LIST (real pairs +-a_i, weights 1), kinds=STRING (random
/// factors, see ProductFamily::random), n=N (same as kinds of N 'r'),
/// seed=S (default 1), noise=X (default 1e-9).
inline GeneratedInput make_generator(std::string_view text) {
  const GeneratorSpec spec = GeneratorSpec::parse(text);
  auto get = [&](std::string_view key) -> const std::string* {
    const auto it = spec.params.find(key);
    return it == spec.params.end() ? nullptr : &it->second;
  };
  const std::map<std::string, std::vector<std::string>> allowed{
      {"grid", {"d", "n"}}, {"product", {"a", "kinds", "n", "seed", "noise"}}};
  const auto fam = allowed.find(spec.family);
  if (fam == allowed.end()) throw UsageError("unknown generator family '" + spec.family + "'");
  for (const auto& [k, v] : spec.params)
    if (std::find(fam->second.begin(), fam->second.end(), k) == fam->second.end())
      throw UsageError("unknown key '" + k + "' for generator family '" + spec.family + "'");

  GeneratedInput out;
  if (spec.family == "grid") {
    const auto* d = get("d");
    if (!d) throw UsageError("grid generator needs d=");
    const auto* n = get("n");
    GridFamily g(detail::parse_uint(*d, "d"), n ? detail::parse_uint(*n, "n") : 1);
    out.stream = g.stream();
    return out;
  }

  const std::uint64_t seed = get("seed") ? detail::parse_uint(*get("seed"), "seed") : 1;
  double noise = 1e-9;
  if (const auto* x = get("noise")) {
    const auto [ptr, ec] = std::from_chars(x->data(), x->data() + x->size(), noise);
    if (ec != std::errc() || ptr != x->data() + x->size() || !(noise >= 0))
      throw UsageError("bad value for 'noise' in generator spec");
  }
  std::shared_ptr<const ProductFamily> fam_ptr;
  if (const auto* a = get("a")) {
    if (get("kinds") || get("n")) throw UsageError("product generator: a= excludes kinds= and n=");
    std::vector<Factor> factors;
    for (const auto& v : detail::parse_list(*a)) {
      if (v == 0) throw DomainError("product generator: a_i must be non-zero");
      factors.push_back(Factor::real_pair(v, -v));
    }
    std::vector<Rational> weights(factors.size(), Rational(1));
    weights[0] = 0;
    fam_ptr = std::make_shared<const ProductFamily>(std::move(factors), std::move(weights), seed, noise);
  } else {
    std::string kinds;
    if (const auto* k = get("kinds")) kinds = *k;
    if (const auto* n = get("n")) {
      if (!kinds.empty()) throw UsageError("product generator: give kinds= or n=, not both");
      kinds.assign(detail::parse_uint(*n, "n"), 'r');
    }
    if (kinds.empty()) throw UsageError("product generator needs a=, kinds= or n=");
    fam_ptr = std::make_shared<const ProductFamily>(ProductFamily::random(kinds, seed, noise));
  }
  out.stream = fam_ptr->stream();
  out.system = fam_ptr->system_ptr();
  out.product = fam_ptr;
  return out;
}

}  // namespace itercert
