#pragma once

#include <cstddef>
#include <vector>

#include "itercert/itercert.hpp"

namespace itercert::support {

/// Exact test: closed-form root inside a box, by rational comparison of the
/// float endpoints.
inline bool box_contains(const IntervalBox& box, const std::vector<ExactComplex>& root) {
  if (box.size() != root.size()) return false;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const auto& c = box[i];
    if (!(Rational(c.re.lo) <= root[i].re && root[i].re <= Rational(c.re.hi))) return false;
    if (!(Rational(c.im.lo) <= root[i].im && root[i].im <= Rational(c.im.hi))) return false;
  }
  return true;
}

struct OracleCount {
  std::size_t n_complex = 0;
  std::size_t n_real = 0;
};

/// Naive single-part reference: certify every candidate, keep those distinct
/// from all kept so far.
inline OracleCount naive_oracle(const std::vector<ComplexPoint>& pts, const PolynomialSystem& f, Engine engine) {
  OracleCount out;
  std::vector<Certificate> kept;
  std::vector<std::size_t> kept_idx;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Certificate c = certify(f, pts[i], engine, i);
    if (!c.success) continue;
    bool fresh = true;
    for (std::size_t j = 0; j < kept.size() && fresh; ++j) fresh = distinct(kept[j], c, pts[kept_idx[j]], pts[i]);
    if (!fresh) continue;
    kept.push_back(c);
    kept_idx.push_back(i);
    ++out.n_complex;
    if (c.real_certified == Realness::yes) ++out.n_real;
  }
  return out;
}

/// Eight points split by four scripted thresholds; stream order s1..s8.
inline std::vector<ComplexPoint> eight_points() {
  return {ComplexPoint{{1.8, 0.0}},   ComplexPoint{{-1.2, 1.4}}, ComplexPoint{{0.5, 0.0}},
          ComplexPoint{{-2.2, 0.0}},  ComplexPoint{{-1.2, -1.4}}, ComplexPoint{{3.2, 1.1}},
          ComplexPoint{{3.2, -1.1}},  ComplexPoint{{-0.6, 0.0}}};
}

/// Splits s1 at the root, s2 left, s6 right, then s3 under "01"; collar 0.3.
inline BuildConfig eight_point_config() {
  BuildConfig cfg;
  cfg.k = 3;
  cfg.epsilon = 0.3;
  cfg.strategy = SplitStrategy::scripted;
  cfg.bitmask = true;
  cfg.script = {{"", 0}, {"0", 1}, {"1", 5}, {"01", 2}};
  return cfg;
}

}  // namespace itercert::support
