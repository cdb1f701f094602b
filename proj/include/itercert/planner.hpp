#pragma once

#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "itercert/engines.hpp"
#include "itercert/errors.hpp"

namespace itercert {

/// 1024-based units: "0.9953 GiB", "3.0518 MiB", ...
inline std::string human_bits(double bits) {
  const char* units[] = {"B", "KiB", "MiB", "GiB", "TiB"};
  double v = bits / 8.0;
  int u = 0;
  // switch units at 1000 so 1019 MiB reads 0.9952 GiB
  while (v >= 1000.0 && u < 4) {
    v /= 1024.0;
    ++u;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f %s", v, units[u]);
  return buf;
}

struct PlanReport {
  std::uint64_t d = 0;
  std::uint64_t n = 0;
  Engine engine = Engine::krawczyk;
  bool bitmask = true;

  double m_star_real = 0;  // continuous minimizer of the space formula
  double closed_form_m = 0;
  double closed_form_bits = 0;
  std::uint64_t m_star = 0;  // leaves needed at part size k_star
  std::uint64_t k_star = 0;  // nearest integer to d / m_star_real
  std::uint64_t memory_bits = 0;
  std::string memory_human;
  std::uint64_t build_next_calls = 0;
  std::uint64_t certify_next_calls = 0;
  std::uint64_t baseline_reference_point_bits = 0;
  std::string baseline_human;
  std::uint64_t predicted_split_k = 0;
  std::uint64_t predicted_split_bits = 0;
  std::string predicted_split_human;
  std::vector<std::string> notes;
};

namespace detail {

/// Per-candidate cost in bits of a collected part: 384 n (+128 for alpha).
inline double part_cost(std::uint64_t n, Engine e) { return 384.0 * n + (e == Engine::alpha ? 128.0 : 0.0); }

/// Space formula with k = d / m.
inline double space_bits(double m, double d, double c, bool bitmask) {
  const double tree = bitmask ? d * std::log2(m) : 64.0 * (m - 1);
  return tree + c * d / m;
}

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return a / b + (a % b != 0); }

inline std::uint64_t ceil_log2(std::uint64_t m) {
  std::uint64_t h = 0;
  while ((std::uint64_t{1} << h) < m) ++h;
  return h;
}

}  // namespace detail

/// 384 n k + 64 (ceil(d/k) - 1): memory when split points are known in advance.
inline std::uint64_t predicted_split_bits(std::uint64_t d, std::uint64_t n, std::uint64_t k) {
  return 384 * n * k + 64 * (detail::ceil_div(d, k) - 1);
}

inline PlanReport plan(std::uint64_t d, std::uint64_t n, Engine engine, bool bitmask) {
  if (d < 1 || n < 1) throw DomainError("plan needs d >= 1 and n >= 1");
  PlanReport r;
  r.d = d;
  r.n = n;
  r.engine = engine;
  r.bitmask = bitmask;
  const double dd = static_cast<double>(d);
  const double c = detail::part_cost(n, engine);

  // Direct minimization over m in [1, d]; the formula is convex in m.
  auto f = [&](double m) { return detail::space_bits(m, dd, c, bitmask); };
  const auto [m_min, f_min] = boost::math::tools::brent_find_minima(f, 1.0, std::max(1.0, dd), 52);
  r.m_star_real = m_min;
  (void)f_min;

  if (bitmask) {
    r.closed_form_m = c * std::log(2.0);
    r.closed_form_bits = dd * std::log2(r.closed_form_m) + dd * std::log2(std::exp(1.0));
  } else {
    r.closed_form_m = std::sqrt(c * dd / 64.0);
    r.closed_form_bits = 2.0 * std::sqrt(64.0 * c * dd) - 64.0;
  }

  r.k_star = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(dd / r.m_star_real)));
  r.m_star = detail::ceil_div(d, r.k_star);
  const double tree_bits =
      bitmask ? dd * std::log2(static_cast<double>(r.m_star)) : 64.0 * static_cast<double>(r.m_star - 1);
  r.memory_bits = static_cast<std::uint64_t>(std::ceil(tree_bits + c * static_cast<double>(r.k_star)));
  r.memory_human = human_bits(static_cast<double>(r.memory_bits));

  r.build_next_calls = d * detail::ceil_log2(r.m_star);
  r.certify_next_calls = bitmask ? d : d * r.m_star;
  r.baseline_reference_point_bits = 2 * d * 64;
  r.baseline_human = human_bits(static_cast<double>(r.baseline_reference_point_bits));

  // The predicted-split curve is flat across a run of k; take the minimizer
  // nearest the continuous optimum sqrt(64 d / 384 n).
  const double k_cont = std::sqrt(64.0 * dd / (384.0 * static_cast<double>(n)));
  const auto k_lo = static_cast<std::uint64_t>(std::max(1.0, std::floor(k_cont / 2)));
  const auto k_hi = std::min<std::uint64_t>(d, static_cast<std::uint64_t>(std::ceil(k_cont * 2)) + 1);
  std::uint64_t best_k = 1;
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  double best_gap = 0;
  for (std::uint64_t k = k_lo; k <= std::max(k_lo, k_hi); ++k) {
    const std::uint64_t v = predicted_split_bits(d, n, k);
    const double gap = std::abs(static_cast<double>(k) - k_cont);
    if (v < best || (v == best && gap < best_gap)) {
      best = v;
      best_k = k;
      best_gap = gap;
    }
  }
  r.predicted_split_k = best_k;
  r.predicted_split_bits = best;
  r.predicted_split_human = human_bits(static_cast<double>(best));

  const double log_calls = dd * std::log2(r.m_star_real);
  char buf[256];
  std::snprintf(buf, sizeof buf, "d*log2(m*) = %.0f next calls; 10019198441 does not follow from this formula",
                log_calls);
  r.notes.emplace_back(buf);
  const double um = std::sqrt(c * dd / 64.0);
  const double ub = 2.0 * std::sqrt(64.0 * c * dd) - 64.0;
  std::snprintf(buf, sizeof buf,
                "unmasked optimum is m* = sqrt(c d / 64) = %.1f with 2 sqrt(64 c d) - 64 = %.0f bits (%s); neither "
                "2.61 MB nor m* = sqrt(d/6n) follows from this formula",
                um, ub, human_bits(ub).c_str());
  r.notes.emplace_back(buf);
  return r;
}

}  // namespace itercert
