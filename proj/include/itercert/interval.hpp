#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "itercert/errors.hpp"

namespace itercert {

// Directed rounding without touching the FPU mode. Each operation is done in
// round-to-nearest and the error-free remainder (TwoSum / FMA) decides whether
// the endpoint has to move one float outward. Exact results stay exact.
namespace rounding {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kMax = std::numeric_limits<double>::max();
// Below this magnitude FMA remainders may be inexact (subnormal range).
inline constexpr double kTiny = 0x1p-960;

inline double next_down(double x) { return std::nextafter(x, -kInf); }
inline double next_up(double x) { return std::nextafter(x, kInf); }

namespace detail {

// Overflow to +-inf from finite operands: the true value is finite, so the
// bound on the opposite side is the largest finite float.
inline double overflow_down(double r, bool finite_inputs) {
  if (std::isnan(r)) return -kInf;
  return (finite_inputs && r > 0) ? kMax : r;
}
inline double overflow_up(double r, bool finite_inputs) {
  if (std::isnan(r)) return kInf;
  return (finite_inputs && r < 0) ? -kMax : r;
}

inline double two_sum_err(double a, double b, double s) {
  const double bb = s - a;
  return (a - (s - bb)) + (b - bb);
}

}  // namespace detail

inline double add_down(double a, double b) {
  const double s = a + b;
  if (!std::isfinite(s)) return detail::overflow_down(s, std::isfinite(a) && std::isfinite(b));
  return detail::two_sum_err(a, b, s) < 0 ? next_down(s) : s;
}

inline double add_up(double a, double b) {
  const double s = a + b;
  if (!std::isfinite(s)) return detail::overflow_up(s, std::isfinite(a) && std::isfinite(b));
  return detail::two_sum_err(a, b, s) > 0 ? next_up(s) : s;
}

inline double sub_down(double a, double b) { return add_down(a, -b); }
inline double sub_up(double a, double b) { return add_up(a, -b); }

inline double mul_down(double a, double b) {
  if (a == 0 || b == 0) return 0.0;
  const double p = a * b;
  if (!std::isfinite(p)) return detail::overflow_down(p, std::isfinite(a) && std::isfinite(b));
  if (std::abs(p) < kTiny) return next_down(p);
  return std::fma(a, b, -p) < 0 ? next_down(p) : p;
}

inline double mul_up(double a, double b) {
  if (a == 0 || b == 0) return 0.0;
  const double p = a * b;
  if (!std::isfinite(p)) return detail::overflow_up(p, std::isfinite(a) && std::isfinite(b));
  if (std::abs(p) < kTiny) return next_up(p);
  return std::fma(a, b, -p) > 0 ? next_up(p) : p;
}

// a / b for b != 0. The remainder a - q*b is exact, so sign(r/b) tells on
// which side of q the true quotient lies.
inline double div_down(double a, double b) {
  if (a == 0) return 0.0;
  const double q = a / b;
  if (!std::isfinite(q)) return detail::overflow_down(q, std::isfinite(a) && std::isfinite(b));
  if (std::isinf(b)) return 0.0;
  if (std::abs(q) < kTiny) return next_down(q);
  const double r = std::fma(-q, b, a);
  return (r != 0 && ((r < 0) != (b < 0))) ? next_down(q) : q;
}

inline double div_up(double a, double b) {
  if (a == 0) return 0.0;
  const double q = a / b;
  if (!std::isfinite(q)) return detail::overflow_up(q, std::isfinite(a) && std::isfinite(b));
  if (std::isinf(b)) return 0.0;
  if (std::abs(q) < kTiny) return next_up(q);
  const double r = std::fma(-q, b, a);
  return (r != 0 && ((r < 0) == (b < 0))) ? next_up(q) : q;
}

inline double sqrt_down(double a) {
  if (a <= 0) return 0.0;
  if (std::isinf(a)) return kInf;
  const double r = std::sqrt(a);
  return std::fma(r, r, -a) > 0 ? next_down(r) : r;
}

inline double sqrt_up(double a) {
  if (a <= 0) return 0.0;
  if (std::isinf(a)) return kInf;
  const double r = std::sqrt(a);
  return std::fma(r, r, -a) < 0 ? next_up(r) : r;
}

}  // namespace rounding

/// Closed real interval [lo, hi] with lo <= hi.
struct RealInterval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr RealInterval() = default;
  constexpr RealInterval(double point) : lo(point), hi(point) {}  // NOLINT: implicit by intent
  RealInterval(double l, double h) : lo(l), hi(h) {
    if (std::isnan(l) || std::isnan(h) || l > h) throw DomainError("invalid interval endpoints");
  }

  static RealInterval entire() { return {-rounding::kInf, rounding::kInf}; }

  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains_zero() const { return lo <= 0.0 && 0.0 <= hi; }
  bool is_point() const { return lo == hi; }
  bool is_finite() const { return std::isfinite(lo) && std::isfinite(hi); }
  double width() const { return rounding::sub_up(hi, lo); }
  double mid() const { return is_finite() ? lo + 0.5 * (hi - lo) : (lo + hi) / 2; }
  /// Largest absolute value.
  double mag() const { return std::max(std::abs(lo), std::abs(hi)); }
  /// Smallest absolute value.
  double mig() const { return contains_zero() ? 0.0 : std::min(std::abs(lo), std::abs(hi)); }

  bool subset_of(const RealInterval& o) const { return o.lo <= lo && hi <= o.hi; }
  bool interior_of(const RealInterval& o) const { return o.lo < lo && hi < o.hi; }

  friend bool operator==(const RealInterval&, const RealInterval&) = default;
};

inline RealInterval operator-(const RealInterval& a) { return {-a.hi, -a.lo}; }

inline RealInterval operator+(const RealInterval& a, const RealInterval& b) {
  return {rounding::add_down(a.lo, b.lo), rounding::add_up(a.hi, b.hi)};
}

inline RealInterval operator-(const RealInterval& a, const RealInterval& b) {
  return {rounding::sub_down(a.lo, b.hi), rounding::sub_up(a.hi, b.lo)};
}

inline RealInterval operator*(const RealInterval& a, const RealInterval& b) {
  using rounding::mul_down;
  using rounding::mul_up;
  if (a.lo >= 0) {
    if (b.lo >= 0) return {mul_down(a.lo, b.lo), mul_up(a.hi, b.hi)};
    if (b.hi <= 0) return {mul_down(a.hi, b.lo), mul_up(a.lo, b.hi)};
    return {mul_down(a.hi, b.lo), mul_up(a.hi, b.hi)};
  }
  if (a.hi <= 0) {
    if (b.lo >= 0) return {mul_down(a.lo, b.hi), mul_up(a.hi, b.lo)};
    if (b.hi <= 0) return {mul_down(a.hi, b.hi), mul_up(a.lo, b.lo)};
    return {mul_down(a.lo, b.hi), mul_up(a.lo, b.lo)};
  }
  if (b.lo >= 0) return {mul_down(a.lo, b.hi), mul_up(a.hi, b.hi)};
  if (b.hi <= 0) return {mul_down(a.hi, b.lo), mul_up(a.lo, b.lo)};
  return {std::min(mul_down(a.lo, b.hi), mul_down(a.hi, b.lo)), std::max(mul_up(a.lo, b.lo), mul_up(a.hi, b.hi))};
}

inline RealInterval operator/(const RealInterval& a, const RealInterval& b) {
  if (b.contains_zero()) throw DomainError("interval division by an interval containing zero");
  const double lo = std::min({rounding::div_down(a.lo, b.lo), rounding::div_down(a.lo, b.hi),
                              rounding::div_down(a.hi, b.lo), rounding::div_down(a.hi, b.hi)});
  const double hi = std::max({rounding::div_up(a.lo, b.lo), rounding::div_up(a.lo, b.hi),
                              rounding::div_up(a.hi, b.lo), rounding::div_up(a.hi, b.hi)});
  return {lo, hi};
}

inline RealInterval& operator+=(RealInterval& a, const RealInterval& b) { return a = a + b; }
inline RealInterval& operator-=(RealInterval& a, const RealInterval& b) { return a = a - b; }
inline RealInterval& operator*=(RealInterval& a, const RealInterval& b) { return a = a * b; }

/// x^2, tighter than x*x when x straddles zero.
inline RealInterval sqr(const RealInterval& a) {
  const double m = a.mig();
  const double hi = rounding::mul_up(a.mag(), a.mag());
  return {rounding::mul_down(m, m), hi};
}

inline RealInterval sqrt(const RealInterval& a) {
  if (a.hi < 0) throw DomainError("square root of a negative interval");
  return {rounding::sqrt_down(std::max(a.lo, 0.0)), rounding::sqrt_up(a.hi)};
}

inline RealInterval hull(const RealInterval& a, const RealInterval& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

inline std::optional<RealInterval> intersect(const RealInterval& a, const RealInterval& b) {
  const double lo = std::max(a.lo, b.lo);
  const double hi = std::min(a.hi, b.hi);
  if (lo > hi) return std::nullopt;
  return RealInterval{lo, hi};
}

inline std::ostream& operator<<(std::ostream& os, const RealInterval& x) {
  return os << '[' << x.lo << ", " << x.hi << ']';
}

/// Axis-aligned rectangle re x im in the complex plane.
struct ComplexInterval {
  RealInterval re;
  RealInterval im;

  constexpr ComplexInterval() = default;
  ComplexInterval(RealInterval r, RealInterval i) : re(r), im(i) {}
  ComplexInterval(std::complex<double> z) : re(z.real()), im(z.imag()) {}  // NOLINT
  ComplexInterval(double x) : re(x), im(0.0) {}                           // NOLINT

  bool contains(std::complex<double> z) const { return re.contains(z.real()) && im.contains(z.imag()); }
  bool is_finite() const { return re.is_finite() && im.is_finite(); }
  bool is_zero() const { return re.lo == 0 && re.hi == 0 && im.lo == 0 && im.hi == 0; }
  std::complex<double> mid() const { return {re.mid(), im.mid()}; }

  /// Upper bound of |z| over the rectangle.
  double mag() const {
    const double r = re.mag();
    const double i = im.mag();
    return rounding::sqrt_up(rounding::add_up(rounding::mul_up(r, r), rounding::mul_up(i, i)));
  }
  /// Lower bound of |z| over the rectangle.
  double mig() const {
    const double r = re.mig();
    const double i = im.mig();
    return rounding::sqrt_down(rounding::add_down(rounding::mul_down(r, r), rounding::mul_down(i, i)));
  }

  bool subset_of(const ComplexInterval& o) const { return re.subset_of(o.re) && im.subset_of(o.im); }
  bool interior_of(const ComplexInterval& o) const { return re.interior_of(o.re) && im.interior_of(o.im); }

  friend bool operator==(const ComplexInterval&, const ComplexInterval&) = default;
};

inline ComplexInterval conj(const ComplexInterval& a) { return {a.re, -a.im}; }
inline ComplexInterval operator-(const ComplexInterval& a) { return {-a.re, -a.im}; }
inline ComplexInterval operator+(const ComplexInterval& a, const ComplexInterval& b) {
  return {a.re + b.re, a.im + b.im};
}
inline ComplexInterval operator-(const ComplexInterval& a, const ComplexInterval& b) {
  return {a.re - b.re, a.im - b.im};
}
inline ComplexInterval operator*(const ComplexInterval& a, const ComplexInterval& b) {
  if (a.im.lo == 0 && a.im.hi == 0) return {a.re * b.re, a.re * b.im};
  if (b.im.lo == 0 && b.im.hi == 0) return {a.re * b.re, a.im * b.re};
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline ComplexInterval operator*(const RealInterval& a, const ComplexInterval& b) {
  return {a * b.re, a * b.im};
}
inline ComplexInterval operator/(const ComplexInterval& a, const ComplexInterval& b) {
  const RealInterval den = sqr(b.re) + sqr(b.im);
  if (den.lo <= 0) throw DomainError("complex interval division by an enclosure of zero");
  const ComplexInterval num = a * conj(b);
  return {num.re / den, num.im / den};
}
inline ComplexInterval& operator+=(ComplexInterval& a, const ComplexInterval& b) { return a = a + b; }
inline ComplexInterval& operator-=(ComplexInterval& a, const ComplexInterval& b) { return a = a - b; }
inline ComplexInterval& operator*=(ComplexInterval& a, const ComplexInterval& b) { return a = a * b; }

inline ComplexInterval hull(const ComplexInterval& a, const ComplexInterval& b) {
  return {hull(a.re, b.re), hull(a.im, b.im)};
}

inline std::optional<ComplexInterval> intersect(const ComplexInterval& a, const ComplexInterval& b) {
  auto r = intersect(a.re, b.re);
  auto i = intersect(a.im, b.im);
  if (!r || !i) return std::nullopt;
  return ComplexInterval{*r, *i};
}

inline std::ostream& operator<<(std::ostream& os, const ComplexInterval& z) {
  return os << z.re << " + i" << z.im;
}

/// Product of rectangles in C^n.
struct IntervalBox {
  std::vector<ComplexInterval> coords;

  IntervalBox() = default;
  explicit IntervalBox(std::size_t n) : coords(n) {}
  explicit IntervalBox(std::vector<ComplexInterval> c) : coords(std::move(c)) {}

  static IntervalBox point(const std::vector<std::complex<double>>& p) {
    IntervalBox box(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) box.coords[i] = ComplexInterval(p[i]);
    return box;
  }

  std::size_t size() const { return coords.size(); }
  ComplexInterval& operator[](std::size_t i) { return coords[i]; }
  const ComplexInterval& operator[](std::size_t i) const { return coords[i]; }

  bool is_finite() const {
    return std::all_of(coords.begin(), coords.end(), [](const auto& c) { return c.is_finite(); });
  }

  friend bool operator==(const IntervalBox&, const IntervalBox&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const IntervalBox& b) {
  os << '(';
  for (std::size_t i = 0; i < b.size(); ++i) os << (i ? ", " : "") << b[i];
  return os << ')';
}

namespace detail {

inline void require_same_dim(const IntervalBox& a, const IntervalBox& b) {
  if (a.size() != b.size()) throw DimensionError("interval boxes differ in dimension");
}
}  // namespace detail

inline std::optional<IntervalBox> intersect(const IntervalBox& a, const IntervalBox& b) {
  detail::require_same_dim(a, b);
  IntervalBox out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto c = intersect(a[i], b[i]);
    if (!c) return std::nullopt;
    out[i] = *c;
  }
  return out;
}

inline IntervalBox hull(const IntervalBox& a, const IntervalBox& b) {
  detail::require_same_dim(a, b);
  IntervalBox out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = hull(a[i], b[i]);
  return out;
}

inline bool disjoint(const IntervalBox& a, const IntervalBox& b) { return !intersect(a, b).has_value(); }

/// Every endpoint of `inner` lies strictly inside the matching endpoints of `outer`.
inline bool contained_in_interior(const IntervalBox& inner, const IntervalBox& outer) {
  detail::require_same_dim(inner, outer);
  for (std::size_t i = 0; i < inner.size(); ++i)
    if (!inner[i].interior_of(outer[i])) return false;
  return true;
}

inline bool subset_of(const IntervalBox& inner, const IntervalBox& outer) {
  detail::require_same_dim(inner, outer);
  for (std::size_t i = 0; i < inner.size(); ++i)
    if (!inner[i].subset_of(outer[i])) return false;
  return true;
}

/// Mirror every imaginary component.
inline IntervalBox conj(const IntervalBox& a) {
  IntervalBox out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = conj(a[i]);
  return out;
}

struct BoxRelation {
  std::optional<IntervalBox> intersection;
  IntervalBox hull;
  bool disjoint = false;
  bool contained_in_interior = false;
};

inline BoxRelation box_ops(const IntervalBox& a, const IntervalBox& b) {
  BoxRelation r;
  r.intersection = intersect(a, b);
  r.hull = hull(a, b);
  r.disjoint = !r.intersection.has_value();
  r.contained_in_interior = contained_in_interior(a, b);
  return r;
}

/// Dense square matrix of complex intervals, row-major.
class IntervalMatrix {
 public:
  IntervalMatrix() = default;
  explicit IntervalMatrix(std::size_t n) : n_(n), data_(n * n) {}

  static IntervalMatrix identity(std::size_t n) {
    IntervalMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = ComplexInterval(1.0);
    return m;
  }

  std::size_t size() const { return n_; }
  ComplexInterval& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const ComplexInterval& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  /// Upper bound of the max-row-sum norm.
  double norm_inf() const {
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n_; ++j) row = rounding::add_up(row, (*this)(i, j).mag());
      best = std::max(best, row);
    }
    return best;
  }

 private:
  std::size_t n_ = 0;
  std::vector<ComplexInterval> data_;
};

inline IntervalMatrix operator-(const IntervalMatrix& a, const IntervalMatrix& b) {
  if (a.size() != b.size()) throw DimensionError("interval matrices differ in size");
  IntervalMatrix out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) out(i, j) = a(i, j) - b(i, j);
  return out;
}

inline IntervalMatrix operator*(const IntervalMatrix& a, const IntervalMatrix& b) {
  if (a.size() != b.size()) throw DimensionError("interval matrices differ in size");
  const std::size_t n = a.size();
  IntervalMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      ComplexInterval acc(0.0);
      for (std::size_t l = 0; l < n; ++l)
        if (!a(i, l).is_zero() && !b(l, j).is_zero()) acc += a(i, l) * b(l, j);
      out(i, j) = acc;
    }
  return out;
}

inline std::vector<ComplexInterval> operator*(const IntervalMatrix& a, const std::vector<ComplexInterval>& v) {
  if (a.size() != v.size()) throw DimensionError("matrix and vector differ in size");
  std::vector<ComplexInterval> out(v.size(), ComplexInterval(0.0));
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j)
      if (!a(i, j).is_zero() && !v[j].is_zero()) out[i] += a(i, j) * v[j];
  return out;
}

}  // namespace itercert
