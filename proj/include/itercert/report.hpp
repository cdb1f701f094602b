#pragma once

#include <sstream>
#include <string>

#include "itercert/bsp.hpp"
#include "itercert/pipeline.hpp"
#include "itercert/planner.hpp"

namespace itercert {

/// `key = value` lines. Counters are appended when `counters` is set.
inline std::string format_report(const RunReport& r, bool counters) {
  std::ostringstream os;
  os << "n_complex = " << r.tally.n_complex << '\n';
  os << "n_real = " << r.tally.n_real << '\n';
  os << "failures = " << r.tally.failures.size() << '\n';
  for (std::size_t i = 0; i < r.tally.failures.size(); ++i)
    os << "failure." << i << " = " << r.tally.failures[i].candidate_index << ' '
       << to_string(r.tally.failures[i].reason) << '\n';
  os << "tree.m = " << r.tree.m << '\n';
  os << "tree.height = " << r.tree.height << '\n';
  os << "tree.bitmask_bits = " << r.tree.bitmask_bits << '\n';
  os << "tree.internal_nodes = " << r.tree.internal_nodes << '\n';
  os << "tree.oversized_leaves = " << r.tree.oversized_leaves << '\n';
  os << "k_eff = " << r.k_eff << '\n';
  os << "accounted_bits = " << r.accounted_bits << '\n';
  if (counters) {
    os << "build.passes = " << r.build.passes << '\n';
    os << "build.next_calls = " << r.build.next_calls << '\n';
    os << "build.bit_lookups = " << r.build.bit_lookups << '\n';
    os << "build.comparisons = " << r.build.comparisons << '\n';
    os << "certify.next_calls = " << r.certify.next_calls << '\n';
    os << "certify.advance_steps = " << r.certify.advance_steps << '\n';
    os << "certify.bit_lookups = " << r.certify.bit_lookups << '\n';
    os << "certify.filter_comparisons = " << r.certify.filter_comparisons << '\n';
    os << "certify.containment_comparisons = " << r.certify.containment_comparisons << '\n';
    os << "certify.peak_points = " << r.certify.peak_points << '\n';
  }
  return os.str();
}

inline std::string format_plan(const PlanReport& p) {
  std::ostringstream os;
  os.precision(10);
  os << "d = " << p.d << '\n';
  os << "n = " << p.n << '\n';
  os << "engine = " << to_string(p.engine) << '\n';
  os << "bitmask = " << (p.bitmask ? "on" : "off") << '\n';
  os << "m_star_real = " << p.m_star_real << '\n';
  os << "closed_form_m = " << p.closed_form_m << '\n';
  os << "closed_form_bits = " << p.closed_form_bits << '\n';
  os << "m_star = " << p.m_star << '\n';
  os << "k_star = " << p.k_star << '\n';
  os << "memory_bits = " << p.memory_bits << '\n';
  os << "memory = " << p.memory_human << '\n';
  os << "build_next_calls = " << p.build_next_calls << '\n';
  os << "certify_next_calls = " << p.certify_next_calls << '\n';
  os << "baseline_reference_point_bits = " << p.baseline_reference_point_bits << '\n';
  os << "baseline = " << p.baseline_human << '\n';
  os << "predicted_split_k = " << p.predicted_split_k << '\n';
  os << "predicted_split_bits = " << p.predicted_split_bits << '\n';
  os << "predicted_split = " << p.predicted_split_human << '\n';
  for (const auto& note : p.notes) os << "note = " << note << '\n';
  return os.str();
}

}  // namespace itercert
