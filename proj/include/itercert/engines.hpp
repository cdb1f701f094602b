#pragma once

#include <gmpxx.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "itercert/box_eval.hpp"
#include "itercert/errors.hpp"
#include "itercert/interval.hpp"
#include "itercert/poly.hpp"

namespace itercert {

enum class Engine { krawczyk, alpha };

enum class Realness { yes, no, undetermined };

inline std::string_view to_string(Engine e) { return e == Engine::krawczyk ? "krawczyk" : "alpha"; }

inline std::string_view to_string(Realness r) {
  switch (r) {
    case Realness::yes: return "yes";
    case Realness::no: return "no";
    default: return "undetermined";
  }
}

/// Proof object for one candidate. `region` is the certified box (Krawczyk)
/// or the bounding box of the closed ball B(s, 2*beta) (alpha).
struct Certificate {
  Engine engine = Engine::krawczyk;
  std::size_t candidate_index = 0;
  bool success = false;
  IntervalBox region;
  RealInterval beta_bound;   // alpha only
  RealInterval alpha_value;  // alpha only
  RealInterval gamma_bound;  // alpha only
  Realness real_certified = Realness::undetermined;
  RealInterval re1_range;    // == region[0].re
};

struct AlphaConstants {
  RealInterval alpha;
  RealInterval beta;
  RealInterval gamma;
};

// ---------------------------------------------------------------------------
// Shared linear algebra

namespace detail {

inline std::optional<Eigen::MatrixXcd> float_inverse(const Eigen::MatrixXcd& a) {
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
  if (!lu.isInvertible()) return std::nullopt;
  Eigen::MatrixXcd inv = lu.inverse();
  if (!inv.allFinite()) return std::nullopt;
  return inv;
}

inline IntervalMatrix to_interval(const Eigen::MatrixXcd& m) {
  const auto n = static_cast<std::size_t>(m.rows());
  IntervalMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = ComplexInterval(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  return out;
}

inline Eigen::MatrixXcd midpoint(const IntervalMatrix& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXcd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)).mid();
  return out;
}

inline ComplexPoint midpoint(const IntervalBox& box) {
  ComplexPoint p(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) p[i] = box[i].mid();
  return p;
}

inline bool inside(const IntervalBox& box, const ComplexPoint& x) {
  for (std::size_t i = 0; i < box.size(); ++i)
    if (!box[i].contains(x[i])) return false;
  return true;
}

inline double ulp(double v) {
  const double a = std::abs(v);
  return std::nextafter(a, rounding::kInf) - a;
}

inline void require_certificate(const Certificate& c, Engine e) {
  if (!c.success) throw CertificateError("operation needs a successful certificate");
  if (c.engine != e) throw CertificateError("certificate was produced by the other engine");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Krawczyk

struct KrawczykResult {
  IntervalBox image;       // K(x, I)
  double contraction = 0;  // upper bound of ||Id - Y Jac_F(I)||_inf
};

/// K(x, I) = x - Y F(x) + (Id - Y Jac_F(I)) (I - x), outward rounded.
inline KrawczykResult krawczyk_image(const PolynomialSystem& f, const IntervalBox& box, const ComplexPoint& x,
                                     const Eigen::MatrixXcd& y) {
  const std::size_t n = f.n_vars();
  if (box.size() != n || x.size() != n || static_cast<std::size_t>(y.rows()) != n ||
      static_cast<std::size_t>(y.cols()) != n)
    throw DimensionError("krawczyk operator: dimension mismatch");
  if (!y.allFinite()) throw DomainError("krawczyk operator: preconditioner has non-finite entries");

  const IntervalMatrix yi = detail::to_interval(y);
  const std::vector<ComplexInterval> fx = eval_system_on_box(f, IntervalBox::point(x.coords));
  const std::vector<ComplexInterval> yfx = yi * fx;
  const IntervalMatrix m = IntervalMatrix::identity(n) - yi * jacobian_on_box(f, box);

  std::vector<ComplexInterval> offset(n);
  for (std::size_t j = 0; j < n; ++j) offset[j] = box[j] - ComplexInterval(x[j]);
  const std::vector<ComplexInterval> spread = m * offset;

  KrawczykResult out;
  out.image = IntervalBox(n);
  for (std::size_t i = 0; i < n; ++i) out.image[i] = ComplexInterval(x[i]) - yfx[i] + spread[i];
  out.contraction = m.norm_inf();
  return out;
}

inline IntervalBox krawczyk_operator(const PolynomialSystem& f, const IntervalBox& box, const ComplexPoint& x,
                                     const Eigen::MatrixXcd& y) {
  return krawczyk_image(f, box, x, y).image;
}

namespace detail {

inline IntervalBox box_around(const ComplexPoint& s, double scale) {
  IntervalBox box(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double rr = std::max(1e-7, 8 * ulp(s[i].real())) * scale;
    const double ri = std::max(1e-7, 8 * ulp(s[i].imag())) * scale;
    box[i] = ComplexInterval(RealInterval(s[i].real()) + RealInterval(-rr, rr),
                             RealInterval(s[i].imag()) + RealInterval(-ri, ri));
  }
  return box;
}

inline bool krawczyk_accepts(const PolynomialSystem& f, const IntervalBox& box, const ComplexPoint& x) {
  const auto y = float_inverse(jacobian_at(f, x));
  if (!y) return false;
  const KrawczykResult k = krawczyk_image(f, box, x, *y);
  return k.contraction < 1.0 && contained_in_interior(k.image, box);
}

}  // namespace detail

/// Realness of the unique root in a certified box: K(I) inside conj(I)
/// places conj(root) in I, and uniqueness forces root == conj(root).
inline Realness krawczyk_real(const PolynomialSystem& f, const Certificate& c) {
  detail::require_certificate(c, Engine::krawczyk);
  const ComplexPoint x = detail::midpoint(c.region);
  const auto y = detail::float_inverse(jacobian_at(f, x));
  if (!y) return Realness::undetermined;
  const IntervalBox k = krawczyk_operator(f, c.region, x, *y);
  return subset_of(k, conj(c.region)) ? Realness::yes : Realness::undetermined;
}

/// Box I around s with K(I) in int(I) and ||Id - Y Jac_F(I)|| < 1.
///
/// Schedule: one attempt at radius r0 = max(1e-7, 8 ulp) per real component;
/// then one float Newton step of s and five attempts at r0 * 8^i (i = 0..4).
/// The box stays centred on s; the refined point is used as the Krawczyk
/// centre when it lies inside the box.
inline Certificate krawczyk_certify(const PolynomialSystem& f, const ComplexPoint& s, std::size_t index = 0) {
  detail::require_dim(f, s.size());
  Certificate cert;
  cert.engine = Engine::krawczyk;
  cert.candidate_index = index;
  if (!s.is_finite()) return cert;

  auto accept = [&](const IntervalBox& box) {
    cert.success = true;
    cert.region = box;
    cert.re1_range = box[0].re;
    cert.real_certified = krawczyk_real(f, cert);
  };

  IntervalBox box = detail::box_around(s, 1.0);
  if (detail::krawczyk_accepts(f, box, s)) {
    accept(box);
    return cert;
  }

  ComplexPoint refined = s;
  if (auto y = detail::float_inverse(jacobian_at(f, s))) {
    const auto fs = evaluate(f, s);
    Eigen::VectorXcd v(static_cast<Eigen::Index>(fs.size()));
    for (std::size_t i = 0; i < fs.size(); ++i) v(static_cast<Eigen::Index>(i)) = fs[i];
    const Eigen::VectorXcd step = (*y) * v;
    for (std::size_t i = 0; i < s.size(); ++i) refined[i] = s[i] - step(static_cast<Eigen::Index>(i));
    if (!refined.is_finite()) refined = s;
  }

  double scale = 1.0;
  for (int attempt = 0; attempt < 5; ++attempt, scale *= 8.0) {
    box = detail::box_around(s, scale);
    const ComplexPoint& centre = detail::inside(box, refined) ? refined : s;
    if (detail::krawczyk_accepts(f, box, centre)) {
      accept(box);
      return cert;
    }
  }
  return cert;
}

/// Disjoint certified boxes hold distinct roots.
inline bool krawczyk_distinct(const Certificate& a, const Certificate& b) {
  detail::require_certificate(a, Engine::krawczyk);
  detail::require_certificate(b, Engine::krawczyk);
  return disjoint(a.region, b.region);
}

// ---------------------------------------------------------------------------
// Alpha theory

/// (13 - 3 sqrt(17)) / 4 rounded down to a float, decided exactly: x lies
/// below the constant iff 13 - 4x >= 0 and (13 - 4x)^2 >= 153.
inline double alpha_threshold() {
  static const double value = [] {
    auto below = [](double x) {
      const Rational t = Rational(13) - 4 * Rational(x);
      return t >= 0 && t * t >= 153;
    };
    double x = (13.0 - 3.0 * std::sqrt(17.0)) / 4.0;
    while (!below(x)) x = rounding::next_down(x);
    while (below(rounding::next_up(x))) x = rounding::next_up(x);
    return x;
  }();
  return value;
}

namespace detail {

// Enclosure of v^(1/m) for v >= 0, m >= 1, verified by interval powers.
inline RealInterval root_enclosure(RealInterval v, unsigned m) {
  if (m == 1) return v;
  auto pow_iv = [m](double x) {
    RealInterval acc(1.0);
    for (unsigned i = 0; i < m; ++i) acc *= RealInterval(x);
    return acc;
  };
  double lo = v.lo <= 0 ? 0.0 : std::pow(v.lo, 1.0 / m);
  while (lo > 0 && pow_iv(lo).hi > v.lo) lo = rounding::next_down(lo);
  double hi = v.hi <= 0 ? 0.0 : std::pow(v.hi, 1.0 / m);
  if (std::isinf(v.hi)) hi = rounding::kInf;
  while (std::isfinite(hi) && pow_iv(hi).lo < v.hi) hi = rounding::next_up(hi);
  return {lo, hi};
}

}  // namespace detail

/// Enclosures of Smale's beta, gamma and alpha = beta * gamma at s, in the
/// max-modulus norm on C^n.
///
/// With A the exact Jacobian at s (enclosed), R a float inverse of mid(A) and
/// E = Id - R A, ||E|| < 1 gives A^{-1} = (Id - E)^{-1} R, hence
/// ||A^{-1} w|| <= ||R w|| / (1 - ||E||). For gamma the multilinear norm of
/// R D^kF/k! is bounded by max_i sum over the Taylor coefficients |(R T_k)_i|.
/// Throws SingularJacobianError when ||E|| < 1 cannot be shown.
inline AlphaConstants alpha_constants(const PolynomialSystem& f, const ComplexPoint& s) {
  detail::require_dim(f, s.size());
  const std::size_t n = f.n_vars();
  const std::vector<TaylorData> taylor = taylor_expansion(f, s);

  std::vector<ComplexInterval> fs(n, ComplexInterval(0.0));
  IntervalMatrix jac(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& c : taylor[0].entries[i]) fs[i] = c.value;
    if (taylor.size() > 1)
      for (const auto& c : taylor[1].entries[i]) {
        const auto j = static_cast<std::size_t>(std::find(c.exponents.begin(), c.exponents.end(), 1u) - c.exponents.begin());
        jac(i, j) = c.value;
      }
  }

  const auto r = detail::float_inverse(detail::midpoint(jac));
  if (!r) throw SingularJacobianError("Jacobian at the candidate is numerically singular");
  const IntervalMatrix ri = detail::to_interval(*r);
  const double e = (IntervalMatrix::identity(n) - ri * jac).norm_inf();
  if (!(e < 1.0)) throw SingularJacobianError("could not verify invertibility of the Jacobian enclosure");
  const double scale = rounding::div_up(1.0, rounding::sub_down(1.0, e));  // 1 / (1 - ||E||)

  // beta: A^{-1}F = R F + E A^{-1} F, so every coordinate is within
  // delta = ||E|| ||R F|| / (1 - ||E||) of R F.
  const std::vector<ComplexInterval> v = ri * fs;
  double v_hi = 0.0;
  double v_lo = 0.0;
  for (const auto& c : v) {
    v_hi = std::max(v_hi, c.mag());
    v_lo = std::max(v_lo, c.mig());
  }
  const double delta = rounding::mul_up(rounding::mul_up(e, v_hi), scale);
  AlphaConstants out;
  out.beta = RealInterval(std::max(0.0, rounding::sub_down(v_lo, delta)), rounding::add_up(v_hi, delta));

  RealInterval gamma(0.0);
  for (std::size_t k = 2; k < taylor.size(); ++k) {
    double s_hi = 0.0;
    double s_lo = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // (R T_k)_{i, b} = sum_l R_il T_{l, b}
      std::map<Exponents, ComplexInterval> row;
      for (std::size_t l = 0; l < n; ++l)
        for (const auto& c : taylor[k].entries[l]) {
          const ComplexInterval term = ri(i, l) * c.value;
          auto [it, inserted] = row.try_emplace(c.exponents, term);
          if (!inserted) it->second += term;
        }
      double hi = 0.0;
      double lo = 0.0;
      for (const auto& [b, val] : row) {
        hi = rounding::add_up(hi, val.mag());
        lo = rounding::add_down(lo, val.mig());
      }
      s_hi = std::max(s_hi, hi);
      s_lo = std::max(s_lo, lo);
    }
    const double bound_hi = rounding::mul_up(s_hi, scale);
    const double bound_lo = std::max(0.0, rounding::sub_down(s_lo, rounding::mul_up(e, bound_hi)));
    const RealInterval g = detail::root_enclosure(RealInterval(bound_lo, bound_hi), static_cast<unsigned>(k - 1));
    gamma = RealInterval(std::max(gamma.lo, g.lo), std::max(gamma.hi, g.hi));
  }
  out.gamma = gamma;
  out.alpha = out.beta * out.gamma;
  return out;
}

/// Sufficient realness test for an alpha-certified candidate: an exactly
/// real s on a real system, or alpha < 0.03 with ||s - conj(s)|| < 1/(20 gamma).
/// Uses the gamma bound stored in `c`, which must have been issued for s.
inline Realness alpha_real(const PolynomialSystem& f, const ComplexPoint& s, const Certificate& c) {
  detail::require_certificate(c, Engine::alpha);
  const bool exactly_real = std::all_of(s.coords.begin(), s.coords.end(), [](auto z) { return z.imag() == 0.0; });
  if (exactly_real) return Realness::yes;
  if (!(c.alpha_value.hi < 0.03)) return Realness::undetermined;
  detail::require_dim(f, s.size());
  double gap = 0.0;  // ||s - conj(s)|| = 2 max |Im s_i|
  for (const auto& z : s.coords) gap = std::max(gap, rounding::mul_up(2.0, std::abs(z.imag())));
  const double limit = rounding::div_down(1.0, rounding::mul_up(20.0, c.gamma_bound.hi));
  return gap < limit ? Realness::yes : Realness::undetermined;
}

/// Success iff alpha.hi < alpha_threshold(); the region is the bounding box
/// of the ball of radius 2 * beta.hi around s.
inline Certificate alpha_certify(const PolynomialSystem& f, const ComplexPoint& s, std::size_t index = 0) {
  detail::require_dim(f, s.size());
  Certificate cert;
  cert.engine = Engine::alpha;
  cert.candidate_index = index;
  if (!s.is_finite()) return cert;
  AlphaConstants k;
  try {
    k = alpha_constants(f, s);
  } catch (const SingularJacobianError&) {
    return cert;
  }
  cert.beta_bound = k.beta;
  cert.alpha_value = k.alpha;
  cert.gamma_bound = k.gamma;
  if (!(k.alpha.hi < alpha_threshold())) return cert;

  const double radius = rounding::mul_up(2.0, k.beta.hi);
  const RealInterval ball(-radius, radius);
  cert.region = IntervalBox(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    cert.region[i] = ComplexInterval(RealInterval(s[i].real()) + ball, RealInterval(s[i].imag()) + ball);
  cert.re1_range = cert.region[0].re;
  cert.success = true;
  cert.real_certified = alpha_real(f, s, cert);
  return cert;
}

/// ||s1 - s2|| > 2 (beta1 + beta2), with a lower bound on the distance and an
/// upper bound on the radii, in the same max-modulus norm the betas use.
inline bool alpha_distinct(const Certificate& a, const Certificate& b, const ComplexPoint& s1, const ComplexPoint& s2) {
  detail::require_certificate(a, Engine::alpha);
  detail::require_certificate(b, Engine::alpha);
  if (s1.size() != s2.size()) throw DimensionError("alpha_distinct: candidates differ in dimension");
  double dist = 0.0;
  for (std::size_t i = 0; i < s1.size(); ++i)
    dist = std::max(dist, (ComplexInterval(s1[i]) - ComplexInterval(s2[i])).mig());
  const double radii = rounding::mul_up(2.0, rounding::add_up(a.beta_bound.hi, b.beta_bound.hi));
  return dist > radii;
}

// ---------------------------------------------------------------------------
// Engine-generic entry points used by the pipeline

inline Certificate certify(const PolynomialSystem& f, const ComplexPoint& s, Engine engine, std::size_t index = 0) {
  return engine == Engine::krawczyk ? krawczyk_certify(f, s, index) : alpha_certify(f, s, index);
}

inline bool distinct(const Certificate& a, const Certificate& b, const ComplexPoint& s1, const ComplexPoint& s2) {
  if (a.engine != b.engine) throw CertificateError("certificates come from different engines");
  return a.engine == Engine::krawczyk ? krawczyk_distinct(a, b) : alpha_distinct(a, b, s1, s2);
}

}  // namespace itercert
