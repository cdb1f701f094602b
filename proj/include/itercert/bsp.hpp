#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "itercert/errors.hpp"
#include "itercert/interval.hpp"
#include "itercert/poly.hpp"
#include "itercert/rng.hpp"
#include "itercert/stream.hpp"

namespace itercert {

enum class SplitStrategy { median, mean, random, scripted };

inline std::string_view to_string(SplitStrategy s) {
  switch (s) {
    case SplitStrategy::median: return "median";
    case SplitStrategy::mean: return "mean";
    case SplitStrategy::random: return "random";
    default: return "scripted";
  }
}

inline SplitStrategy parse_strategy(std::string_view s) {
  if (s == "median") return SplitStrategy::median;
  if (s == "mean") return SplitStrategy::mean;
  if (s == "random") return SplitStrategy::random;
  if (s == "scripted") return SplitStrategy::scripted;
  throw UsageError("unknown split strategy '" + std::string(s) + "'");
}

struct BuildConfig {
  std::size_t k = 64;
  double epsilon = 1e-6;
  SplitStrategy strategy = SplitStrategy::mean;
  std::uint64_t seed = 0;
  bool bitmask = true;
  std::size_t depth_cap = 64;
  /// Scripted strategy only: node path ("" root, then '0' left / '1' right)
  /// to the stream index of its split point. Listed nodes split regardless
  /// of their count; unlisted nodes stay leaves.
  std::map<std::string, std::size_t> script;

  void validate() const {
    if (k < 1) throw DomainError("part size k must be at least 1");
    if (!(epsilon > 0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be positive and finite");
  }
};

enum class LeafReason { small, unsplittable, depth_cap };

inline std::string_view to_string(LeafReason r) {
  switch (r) {
    case LeafReason::small: return "small";
    case LeafReason::unsplittable: return "unsplittable";
    default: return "depth_cap";
  }
}

struct BspNode {
  bool is_leaf = true;
  std::string path;
  std::size_t count = 0;  // |R_node ∩ S|
  int parent = -1;
  int left = -1;
  int right = -1;
  // internal
  double threshold = 0.0;
  std::vector<bool> bitmask;  // one bit per member in stream order; 1 = right
  // leaf
  std::size_t leaf_id = 0;
  double lo = -rounding::kInf;  // inclusive
  double hi = rounding::kInf;   // exclusive
  LeafReason reason = LeafReason::small;

  std::size_t depth() const { return path.size(); }
};

struct BuildCounters {
  std::uint64_t next_calls = 0;
  std::uint64_t passes = 0;
  std::uint64_t comparisons = 0;
  std::uint64_t bit_lookups = 0;
};

class BspTree {
 public:
  std::vector<BspNode> nodes;  // nodes[0] is the root
  std::vector<int> leaves;     // node index per leaf id, left to right
  std::size_t d = 0;
  std::size_t n = 0;
  double epsilon = 0;
  std::size_t k = 0;
  SplitStrategy strategy = SplitStrategy::mean;
  bool has_bitmasks = false;
  BuildCounters build;

  const BspNode& root() const { return nodes.front(); }
  const BspNode& leaf(std::size_t id) const {
    if (id >= leaves.size()) throw TreeError("leaf id out of range");
    return nodes[static_cast<std::size_t>(leaves[id])];
  }
  std::size_t leaf_count() const { return leaves.size(); }

  /// Node indices from the root down to (excluding) the given leaf, paired
  /// with the side taken (true = right).
  std::vector<std::pair<int, bool>> path_to(std::size_t leaf_id) const {
    std::vector<std::pair<int, bool>> out;
    int cur = leaves.at(leaf_id);
    while (nodes[static_cast<std::size_t>(cur)].parent >= 0) {
      const int parent = nodes[static_cast<std::size_t>(cur)].parent;
      out.emplace_back(parent, nodes[static_cast<std::size_t>(parent)].right == cur);
      cur = parent;
    }
    std::reverse(out.begin(), out.end());
    return out;
  }
};

namespace detail {

struct NodeStats {
  std::size_t count = 0;
  double min = rounding::kInf;
  double max = -rounding::kInf;
  double sum = 0.0;
  std::optional<double> sample;

  void add(double v, SplitMix64* rng) {
    ++count;
    min = std::min(min, v);
    max = std::max(max, v);
    sum += v;
    if (rng && rng->below(count) == 0) sample = v;
  }
};

inline double split_threshold(double re, double eps) { return rounding::sub_down(re, eps); }

class TreeBuilder {
 public:
  TreeBuilder(SolutionStream& stream, const BuildConfig& cfg) : stream_(stream), cfg_(cfg), rng_(cfg.seed) {
    cfg_.validate();
    if (in_memory()) {
      memory_ = dynamic_cast<const InMemoryStream*>(&stream);
      if (!memory_) throw TreeError(std::string(to_string(cfg.strategy)) + " strategy needs an in-memory stream");
    }
    if (cfg.strategy == SplitStrategy::scripted)
      for (const auto& [path, idx] : cfg.script) {
        if (path.find_first_not_of("01") != std::string::npos) throw TreeError("bad script path '" + path + "'");
        if (idx >= stream.size()) throw TreeError("script index out of range for path '" + path + "'");
      }
  }

  BspTree run() {
    tree_.d = stream_.size();
    tree_.n = stream_.dim();
    tree_.epsilon = cfg_.epsilon;
    tree_.k = cfg_.k;
    tree_.strategy = cfg_.strategy;
    tree_.has_bitmasks = cfg_.bitmask;
    tree_.nodes.emplace_back();
    frontier_ = {0};
    const std::uint64_t calls0 = stream_.next_calls();

    if (in_memory()) {
      tree_.nodes[0].count = stream_.size();
      for (;;) {
        memory_stats();
        decide();
        if (pending_.empty()) break;
        pass();
      }
    } else if (stream_.size() <= cfg_.k) {
      tree_.nodes[0].count = stream_.size();  // already small; no pass needed
    } else {
      while (!frontier_.empty() || !pending_.empty()) {
        pass();
        decide();
      }
    }
    tree_.build.next_calls = stream_.next_calls() - calls0;
    finalize();
    return std::move(tree_);
  }

 private:
  bool in_memory() const {
    return cfg_.strategy == SplitStrategy::median || cfg_.strategy == SplitStrategy::scripted;
  }

  BspNode& node(int i) { return tree_.nodes[static_cast<std::size_t>(i)]; }

  // One full pass: bits for pending nodes, statistics for frontier leaves.
  void pass() {
    ++tree_.build.passes;
    stats_.assign(tree_.nodes.size(), NodeStats{});
    cursor_.assign(tree_.nodes.size(), 0);
    std::vector<char> is_pending(tree_.nodes.size(), 0);
    for (int p : pending_) is_pending[static_cast<std::size_t>(p)] = 1;
    stream_.reset();
    while (const ComplexPoint* p = stream_.next()) {
      const double re = (*p)[0].real();
      int cur = 0;
      while (!node(cur).is_leaf) {
        BspNode& nd = node(cur);
        bool right;
        if (is_pending[static_cast<std::size_t>(cur)]) {
          ++tree_.build.comparisons;
          right = re >= nd.threshold;
          if (cfg_.bitmask) nd.bitmask.push_back(right);
        } else if (cfg_.bitmask) {
          ++tree_.build.bit_lookups;
          right = nd.bitmask[cursor_[static_cast<std::size_t>(cur)]++];
        } else {
          ++tree_.build.comparisons;
          right = re >= nd.threshold;
        }
        cur = right ? nd.right : nd.left;
      }
      stats_[static_cast<std::size_t>(cur)].add(re, cfg_.strategy == SplitStrategy::random ? &rng_ : nullptr);
    }
    for (int p : pending_)
      if (cfg_.bitmask && node(p).bitmask.size() != node(p).count)
        throw TreeError("stream is not replayable: member count changed between passes");
    pending_.clear();
    for (int f : frontier_) node(f).count = stats_[static_cast<std::size_t>(f)].count;
  }

  // Frontier statistics from the in-memory point list; not a stream pass.
  void memory_stats() {
    stats_.assign(tree_.nodes.size(), NodeStats{});
    members_.assign(tree_.nodes.size(), {});
    const auto& pts = memory_->points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double re = pts[i][0].real();
      int cur = 0;
      while (!node(cur).is_leaf) cur = re >= node(cur).threshold ? node(cur).right : node(cur).left;
      stats_[static_cast<std::size_t>(cur)].add(re, nullptr);
      members_[static_cast<std::size_t>(cur)].push_back(i);
    }
    for (int f : frontier_) node(f).count = stats_[static_cast<std::size_t>(f)].count;
  }

  std::optional<double> choose(int f, const NodeStats& st) {
    switch (cfg_.strategy) {
      case SplitStrategy::mean: return st.sum / static_cast<double>(st.count);
      case SplitStrategy::random: return st.sample;
      case SplitStrategy::median: {
        std::vector<double> v;
        for (std::size_t i : members_[static_cast<std::size_t>(f)]) v.push_back(memory_->points()[i][0].real());
        const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
        std::nth_element(v.begin(), mid, v.end());
        return *mid;
      }
      case SplitStrategy::scripted: {
        const auto it = cfg_.script.find(node(f).path);
        if (it == cfg_.script.end()) return std::nullopt;
        const auto& mem = members_[static_cast<std::size_t>(f)];
        if (std::find(mem.begin(), mem.end(), it->second) == mem.end())
          throw TreeError("scripted split point for '" + node(f).path + "' is not in that node");
        return memory_->points()[it->second][0].real();
      }
    }
    return std::nullopt;
  }

  void decide() {
    std::vector<int> next_frontier;
    for (int f : frontier_) {
      const NodeStats st = stats_[static_cast<std::size_t>(f)];
      BspNode& nd = node(f);
      const bool scripted = cfg_.strategy == SplitStrategy::scripted;
      if (scripted ? cfg_.script.count(nd.path) == 0 : st.count <= cfg_.k) {
        nd.reason = st.count <= cfg_.k ? LeafReason::small : LeafReason::unsplittable;
        continue;
      }
      if (!(rounding::sub_up(st.max, st.min) > 2 * cfg_.epsilon)) {
        nd.reason = LeafReason::unsplittable;
        continue;
      }
      if (nd.depth() >= cfg_.depth_cap) {
        nd.reason = LeafReason::depth_cap;
        continue;
      }
      const std::optional<double> z = choose(f, st);
      if (!z) {
        nd.reason = LeafReason::unsplittable;
        continue;
      }
      double t = split_threshold(*z, cfg_.epsilon);
      if (!(st.min < t && st.max >= t)) t = split_threshold(st.max, cfg_.epsilon);
      if (!(st.min < t && st.max >= t)) {
        nd.reason = LeafReason::unsplittable;
        continue;
      }
      split(f, t);
      pending_.push_back(f);
      next_frontier.push_back(node(f).left);
      next_frontier.push_back(node(f).right);
    }
    frontier_ = std::move(next_frontier);
  }

  void split(int f, double t) {
    const auto l = static_cast<int>(tree_.nodes.size());
    BspNode left;
    left.parent = f;
    left.path = node(f).path + "0";
    BspNode right;
    right.parent = f;
    right.path = node(f).path + "1";
    tree_.nodes.push_back(std::move(left));
    tree_.nodes.push_back(std::move(right));
    BspNode& nd = node(f);
    nd.is_leaf = false;
    nd.threshold = t;
    nd.left = l;
    nd.right = l + 1;
  }

  void finalize() {
    // Slabs from ancestor halfspaces; leaf ids in left-to-right order.
    std::vector<int> stack{0};
    tree_.nodes[0].lo = -rounding::kInf;
    tree_.nodes[0].hi = rounding::kInf;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      BspNode& nd = node(cur);
      if (nd.is_leaf) {
        nd.leaf_id = tree_.leaves.size();
        tree_.leaves.push_back(cur);
        continue;
      }
      const double lo = nd.lo;
      const double hi = nd.hi;
      const double t = nd.threshold;
      node(nd.left).lo = lo;
      node(nd.left).hi = t;
      node(nd.right).lo = t;
      node(nd.right).hi = hi;
      stack.push_back(node(cur).right);
      stack.push_back(node(cur).left);
    }
    if (!cfg_.bitmask)
      for (auto& nd : tree_.nodes) nd.bitmask.clear();
  }

  SolutionStream& stream_;
  BuildConfig cfg_;
  SplitMix64 rng_;
  const InMemoryStream* memory_ = nullptr;
  BspTree tree_;
  std::vector<int> frontier_;
  std::vector<int> pending_;
  std::vector<NodeStats> stats_;
  std::vector<std::size_t> cursor_;
  std::vector<std::vector<std::size_t>> members_;
};

}  // namespace detail

/// Level-by-level build: each level is one full pass over the stream that
/// appends mask bits for the nodes split after the previous pass and gathers
/// count/min/max/sum/sample statistics for the current leaves. Mean and
/// random need a statistics pass before the root split; median and scripted
/// read their split points from the in-memory point list.
inline BspTree build_tree(SolutionStream& stream, const BuildConfig& cfg) {
  return detail::TreeBuilder(stream, cfg).run();
}

inline std::size_t locate_leaf(const BspTree& tree, const ComplexPoint& p, std::uint64_t* comparisons = nullptr) {
  if (p.size() != tree.n) throw DimensionError("locate_leaf: point dimension differs from the tree");
  const double re = p[0].real();
  int cur = 0;
  while (!tree.nodes[static_cast<std::size_t>(cur)].is_leaf) {
    const BspNode& nd = tree.nodes[static_cast<std::size_t>(cur)];
    if (comparisons) ++*comparisons;
    cur = re < nd.threshold ? nd.left : nd.right;
  }
  return tree.nodes[static_cast<std::size_t>(cur)].leaf_id;
}

/// lo <= r.lo and r.hi < hi. Each finite end costs one comparison; infinite
/// ends are skipped, so a check costs two comparisons minus its infinite ends.
inline bool slab_contains(const BspTree& tree, std::size_t leaf_id, const RealInterval& r,
                          std::uint64_t* comparisons = nullptr) {
  const BspNode& leaf = tree.leaf(leaf_id);
  bool ok = true;
  if (std::isfinite(leaf.lo)) {
    if (comparisons) ++*comparisons;
    ok = leaf.lo <= r.lo;
  }
  if (std::isfinite(leaf.hi)) {
    if (comparisons) ++*comparisons;
    ok = ok && r.hi < leaf.hi;
  }
  return ok;
}

struct TreeStats {
  std::size_t m = 0;
  std::size_t height = 0;
  std::uint64_t bitmask_bits = 0;
  std::size_t internal_nodes = 0;
  std::size_t oversized_leaves = 0;
  std::size_t max_leaf_count = 0;
};

inline TreeStats tree_stats(const BspTree& tree) {
  TreeStats s;
  for (const auto& nd : tree.nodes) {
    if (nd.is_leaf) {
      ++s.m;
      s.height = std::max(s.height, nd.depth());
      s.max_leaf_count = std::max(s.max_leaf_count, nd.count);
      if (nd.count > tree.k) ++s.oversized_leaves;
    } else {
      ++s.internal_nodes;
      s.bitmask_bits += nd.bitmask.size();
    }
  }
  return s;
}

inline std::string format_double(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

/// Preorder dump: `N <threshold> <mask|->` and `L <id> <count> [<lo>,<hi>) <reason>`.
/// With `members`, each leaf line is followed by `  <index> ...` listing the
/// stream indices routed to it (one extra pass, counted on the stream).
inline std::string dump_tree(const BspTree& tree, SolutionStream* members = nullptr) {
  std::vector<std::vector<std::size_t>> leaf_members;
  if (members) {
    leaf_members.resize(tree.leaf_count());
    members->reset();
    std::size_t i = 0;
    while (const ComplexPoint* p = members->next()) leaf_members[locate_leaf(tree, *p)].push_back(i++);
  }
  std::ostringstream os;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const BspNode& nd = tree.nodes[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (nd.is_leaf) {
      os << "L " << nd.leaf_id << ' ' << nd.count << " [" << format_double(nd.lo) << ',' << format_double(nd.hi)
         << ") " << to_string(nd.reason) << '\n';
      if (members) {
        os << ' ';
        for (std::size_t i : leaf_members[nd.leaf_id]) os << ' ' << i;
        os << '\n';
      }
      continue;
    }
    os << "N " << format_double(nd.threshold) << ' ';
    if (nd.bitmask.empty()) {
      os << '-';
    } else {
      for (bool b : nd.bitmask) os << (b ? '1' : '0');
    }
    os << '\n';
    stack.push_back(nd.right);
    stack.push_back(nd.left);
  }
  return os.str();
}

}  // namespace itercert
