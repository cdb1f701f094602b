#pragma once

#include <vector>

#include "itercert/interval.hpp"
#include "itercert/poly.hpp"

namespace itercert {

namespace detail {

inline ComplexInterval eval_on_box(const PolynomialSystem::NumericPoly& p, const IntervalBox& box) {
  ComplexInterval sum(0.0);
  for (const auto& t : p) {
    ComplexInterval m(t.enclosure, RealInterval(0.0));
    for (std::size_t j = 0; j < t.exponents.size(); ++j)
      for (unsigned r = 0; r < t.exponents[j]; ++r) m *= box[j];
    sum += m;
  }
  return sum;
}

inline void require_box_dim(const PolynomialSystem& f, const IntervalBox& box) {
  if (f.n_vars() != box.size()) throw DimensionError("box dimension does not match the system");
}

}  // namespace detail

/// Enclosure of F over the box: F(p) is inside the result for every p in `box`.
inline std::vector<ComplexInterval> eval_system_on_box(const PolynomialSystem& f, const IntervalBox& box) {
  detail::require_box_dim(f, box);
  std::vector<ComplexInterval> out(f.n_vars());
  for (std::size_t i = 0; i < f.n_vars(); ++i) out[i] = detail::eval_on_box(f.numeric(i), box);
  return out;
}

/// Entrywise enclosure of Jac_F over the box.
inline IntervalMatrix jacobian_on_box(const PolynomialSystem& f, const IntervalBox& box) {
  detail::require_box_dim(f, box);
  const std::size_t n = f.n_vars();
  IntervalMatrix jac(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) jac(i, j) = detail::eval_on_box(f.derivative(i, j), box);
  return jac;
}

}  // namespace itercert
