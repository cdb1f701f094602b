#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <iterator>
#include <mutex>
#include <string_view>
#include <thread>
#include <vector>

#include "itercert/bsp.hpp"
#include "itercert/engines.hpp"
#include "itercert/errors.hpp"
#include "itercert/leaf_stream.hpp"
#include "itercert/stream.hpp"

namespace itercert {

enum class FailureReason { cert_failed, boundary_crossing, duplicate_in_leaf, oversized_leaf_skipped };

inline std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::cert_failed: return "cert_failed";
    case FailureReason::boundary_crossing: return "boundary_crossing";
    case FailureReason::duplicate_in_leaf: return "duplicate_in_leaf";
    default: return "oversized_leaf_skipped";
  }
}

struct Failure {
  std::size_t candidate_index = 0;
  FailureReason reason = FailureReason::cert_failed;
  friend bool operator==(const Failure&, const Failure&) = default;
};

struct LeafTally {
  std::size_t leaf_id = 0;
  std::size_t n_complex = 0;
  std::size_t n_real = 0;
};

struct Tally {
  std::size_t n_complex = 0;
  std::size_t n_real = 0;
  std::vector<Failure> failures;
  std::vector<LeafTally> per_leaf;
  std::vector<Certificate> counted;  // filled only with PipelineOptions::keep_certificates

  std::size_t count(FailureReason r) const {
    return static_cast<std::size_t>(
        std::count_if(failures.begin(), failures.end(), [r](const Failure& f) { return f.reason == r; }));
  }
};

/// Counters measured during the certify phase (summed over workers).
struct CertifyCounters {
  std::uint64_t next_calls = 0;
  std::uint64_t advance_steps = 0;
  std::uint64_t bit_lookups = 0;
  std::uint64_t filter_comparisons = 0;       // threshold tests while filtering leaves
  std::uint64_t containment_comparisons = 0;  // slab_contains
  std::size_t peak_points = 0;                // max leaf buffer + 1 streaming point
  std::size_t successful_certificates = 0;
};

struct PipelineOptions {
  Engine engine = Engine::krawczyk;
  std::size_t threads = 1;
  std::size_t oversize_factor = 16;  // leaves above factor * k are skipped
  bool keep_certificates = false;
};

namespace detail {

struct LeafResult {
  LeafTally tally;
  std::vector<Failure> failures;
  std::vector<Certificate> counted;
  CertifyCounters counters;
};

inline LeafResult certify_leaf(SolutionStream& base, const BspTree& tree, const PolynomialSystem& f,
                               std::size_t leaf_id, const PipelineOptions& opt) {
  LeafResult out;
  out.tally.leaf_id = leaf_id;
  const std::uint64_t calls0 = base.next_calls();
  const std::uint64_t adv0 = base.advance_steps();
  auto stream = leaf_stream(base, tree, leaf_id);

  const std::size_t cap = opt.oversize_factor * tree.k;
  if (stream->size() > cap) {
    while (stream->next()) out.failures.push_back({stream->last_index(), FailureReason::oversized_leaf_skipped});
  } else {
    std::vector<ComplexPoint> points;
    std::vector<std::size_t> index;
    points.reserve(stream->size());
    while (const ComplexPoint* p = stream->next()) {
      points.push_back(*p);
      index.push_back(stream->last_index());
    }
    out.counters.peak_points = points.size() + SolutionStream::held_points();

    std::vector<std::size_t> accepted;  // positions into points/certs
    std::vector<Certificate> certs(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].size() != f.n_vars()) throw DimensionError("candidate dimension differs from the system");
      certs[i] = certify(f, points[i], opt.engine, index[i]);
      if (!certs[i].success) {
        out.failures.push_back({index[i], FailureReason::cert_failed});
        continue;
      }
      ++out.counters.successful_certificates;
      if (!slab_contains(tree, leaf_id, certs[i].re1_range, &out.counters.containment_comparisons)) {
        out.failures.push_back({index[i], FailureReason::boundary_crossing});
        continue;
      }
      const bool fresh = std::all_of(accepted.begin(), accepted.end(), [&](std::size_t j) {
        return distinct(certs[j], certs[i], points[j], points[i]);
      });
      if (!fresh) {
        out.failures.push_back({index[i], FailureReason::duplicate_in_leaf});
        continue;
      }
      accepted.push_back(i);
      if (opt.keep_certificates) out.counted.push_back(certs[i]);
      ++out.tally.n_complex;
      if (certs[i].real_certified == Realness::yes) ++out.tally.n_real;
    }
  }
  out.counters.next_calls = base.next_calls() - calls0;
  out.counters.advance_steps = base.advance_steps() - adv0;
  out.counters.bit_lookups = stream->bit_lookups();
  out.counters.filter_comparisons = stream->comparisons();
  return out;
}

}  // namespace detail

/// Collects, certifies and counts one leaf at a time. With threads > 1 each
/// worker uses its own clone of the stream; results merge in leaf order.
inline Tally certify_leafwise(SolutionStream& stream, const BspTree& tree, const PolynomialSystem& f,
                              const PipelineOptions& opt = {}, CertifyCounters* counters = nullptr) {
  if (stream.size() != tree.d) throw TreeError("stream size differs from the tree's d");
  if (stream.dim() != tree.n || f.n_vars() != tree.n) throw DimensionError("system, stream and tree dimensions differ");

  const std::size_t m = tree.leaf_count();
  std::vector<detail::LeafResult> results(m);
  const std::size_t workers = std::max<std::size_t>(1, std::min(opt.threads, m));
  if (workers == 1) {
    for (std::size_t l = 0; l < m; ++l) results[l] = detail::certify_leaf(stream, tree, f, l, opt);
  } else {
    std::atomic<std::size_t> next_leaf{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        try {
          auto local = stream.clone();
          for (std::size_t l = next_leaf++; l < m; l = next_leaf++)
            results[l] = detail::certify_leaf(*local, tree, f, l, opt);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  Tally tally;
  CertifyCounters total;
  for (auto& r : results) {
    tally.n_complex += r.tally.n_complex;
    tally.n_real += r.tally.n_real;
    tally.per_leaf.push_back(r.tally);
    tally.failures.insert(tally.failures.end(), r.failures.begin(), r.failures.end());
    std::move(r.counted.begin(), r.counted.end(), std::back_inserter(tally.counted));
    total.next_calls += r.counters.next_calls;
    total.advance_steps += r.counters.advance_steps;
    total.bit_lookups += r.counters.bit_lookups;
    total.filter_comparisons += r.counters.filter_comparisons;
    total.containment_comparisons += r.counters.containment_comparisons;
    total.peak_points = std::max(total.peak_points, r.counters.peak_points);
    total.successful_certificates += r.counters.successful_certificates;
  }
  std::sort(tally.failures.begin(), tally.failures.end(),
            [](const Failure& a, const Failure& b) { return a.candidate_index < b.candidate_index; });
  if (counters) *counters = total;
  return tally;
}

/// Bits held by the realized tree and the largest leaf buffer:
/// (bitmask ? mask bits : 64 (m - 1)) + 384 n k_eff (+ 128 k_eff for alpha).
inline std::uint64_t account_memory(const BspTree& tree, Engine engine) {
  const TreeStats s = tree_stats(tree);
  const std::uint64_t k_eff = s.max_leaf_count;
  const std::uint64_t tree_bits = tree.has_bitmasks ? s.bitmask_bits : 64 * (s.m - 1);
  return tree_bits + 384 * tree.n * k_eff + (engine == Engine::alpha ? 128 * k_eff : 0);
}

struct RunReport {
  Tally tally;
  TreeStats tree;
  BuildCounters build;
  CertifyCounters certify;
  std::uint64_t accounted_bits = 0;
  std::size_t k_eff = 0;
};

inline RunReport certify_main(SolutionStream& stream, const PolynomialSystem& f, const BuildConfig& cfg,
                              const PipelineOptions& opt = {}) {
  if (stream.dim() != f.n_vars()) throw DimensionError("candidate dimension differs from the system");
  RunReport r;
  const BspTree tree = build_tree(stream, cfg);
  r.tally = certify_leafwise(stream, tree, f, opt, &r.certify);
  r.tree = tree_stats(tree);
  r.build = tree.build;
  r.k_eff = r.tree.max_leaf_count;
  r.accounted_bits = account_memory(tree, opt.engine);
  return r;
}

}  // namespace itercert
