#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "itercert/bsp.hpp"
#include "itercert/errors.hpp"
#include "itercert/stream.hpp"

namespace itercert {

/// Stream over the members of one leaf. `last_index()` is the base-stream
/// index of the point returned by the latest next().
class LeafStream : public SolutionStream {
 public:
  std::size_t leaf_id() const { return leaf_; }
  std::size_t last_index() const { return last_index_; }
  std::uint64_t bit_lookups() const { return bit_lookups_; }
  std::uint64_t comparisons() const { return comparisons_; }
  SolutionStream& base() { return *base_; }

 protected:
  LeafStream(SolutionStream& base, const BspTree& tree, std::size_t leaf)
      : SolutionStream(tree.leaf(leaf).count, base.dim()), base_(&base), tree_(&tree), leaf_(leaf) {
    if (base.size() != tree.d) throw TreeError("leaf stream: stream size differs from the tree's d");
    if (base.dim() != tree.n) throw DimensionError("leaf stream: stream dimension differs from the tree");
    for (const auto& [node, right] : tree.path_to(leaf)) path_.push_back({node, right});
  }

  struct Step {
    int node;
    bool right;
  };

  SolutionStream* base_;
  const BspTree* tree_;
  std::size_t leaf_;
  std::vector<Step> path_;
  std::size_t last_index_ = 0;
  std::uint64_t bit_lookups_ = 0;
  std::uint64_t comparisons_ = 0;
};

/// Walks the root-to-leaf mask path with one cursor per node. Only members
/// are read from the base; runs of non-members become one advance_by().
class MaskedLeafStream final : public LeafStream {
 public:
  MaskedLeafStream(SolutionStream& base, const BspTree& tree, std::size_t leaf) : LeafStream(base, tree, leaf) {
    if (!tree.has_bitmasks) throw TreeError("masked leaf stream needs a tree built with bitmasks");
    cursor_.assign(path_.size(), 0);
    base_->reset();
  }

  std::unique_ptr<SolutionStream> clone() const override {
    auto owned = base_->clone();
    auto c = std::make_unique<MaskedLeafStream>(*owned, *tree_, leaf_);
    c->owned_ = std::move(owned);
    return c;
  }

 protected:
  void produce(std::size_t, ComplexPoint& out) override {
    const std::size_t skip_run = seek_member();
    if (skip_run) base_->advance_by(skip_run);
    const ComplexPoint* p = base_->next();
    if (!p) throw StreamError("masked leaf stream: base stream ended early");
    last_index_ = root_pos_ - 1;
    out = *p;
  }

  void rewind() override {
    std::fill(cursor_.begin(), cursor_.end(), 0);
    root_pos_ = 0;
    base_->reset();
  }

  void skip(std::size_t, std::size_t count) override {
    std::size_t run = 0;
    for (std::size_t i = 0; i < count; ++i) run += seek_member() + 1;
    last_index_ = root_pos_ - 1;
    base_->advance_by(run);
  }

 private:
  // Consumes mask bits up to and including the next member; returns the
  // number of non-members passed over.
  std::size_t seek_member() {
    std::size_t skipped = 0;
    for (;;) {
      if (path_.empty()) {
        ++root_pos_;
        return skipped;
      }
      std::size_t level = 0;
      for (; level < path_.size(); ++level) {
        const auto& mask = tree_->nodes[static_cast<std::size_t>(path_[level].node)].bitmask;
        if (cursor_[level] >= mask.size()) throw StreamError("masked leaf stream: ran past the end of a mask");
        ++bit_lookups_;
        if (mask[cursor_[level]++] != path_[level].right) break;
      }
      ++root_pos_;
      if (level == path_.size()) return skipped;
      ++skipped;
    }
  }

  std::vector<std::size_t> cursor_;
  std::size_t root_pos_ = 0;
  std::unique_ptr<SolutionStream> owned_;
};

/// Unmasked variant: one full pass of the base per leaf, testing each point
/// against the ancestor thresholds. The base is read to its end.
class FilteredLeafStream final : public LeafStream {
 public:
  FilteredLeafStream(SolutionStream& base, const BspTree& tree, std::size_t leaf) : LeafStream(base, tree, leaf) {
    base_->reset();
  }

  std::unique_ptr<SolutionStream> clone() const override {
    auto owned = base_->clone();
    auto c = std::make_unique<FilteredLeafStream>(*owned, *tree_, leaf_);
    c->owned_ = std::move(owned);
    return c;
  }

 protected:
  void produce(std::size_t index, ComplexPoint& out) override {
    for (;;) {
      const ComplexPoint* p = base_->next();
      if (!p) throw StreamError("filtered leaf stream: base stream ended early");
      const std::size_t at = base_->position() - 1;
      if (member(*p)) {
        last_index_ = at;
        out = *p;
        break;
      }
    }
    if (index + 1 == size())
      while (base_->next()) {
      }
  }

  void rewind() override { base_->reset(); }

  void skip(std::size_t from, std::size_t count) override {
    ComplexPoint scratch(dim());
    for (std::size_t i = 0; i < count; ++i) produce(from + i, scratch);
  }

 private:
  bool member(const ComplexPoint& p) {
    const double re = p[0].real();
    for (const auto& step : path_) {
      ++comparisons_;
      if ((re >= tree_->nodes[static_cast<std::size_t>(step.node)].threshold) != step.right) return false;
    }
    return true;
  }

  std::unique_ptr<SolutionStream> owned_;
};

inline std::unique_ptr<LeafStream> leaf_stream(SolutionStream& base, const BspTree& tree, std::size_t leaf) {
  if (tree.has_bitmasks) return std::make_unique<MaskedLeafStream>(base, tree, leaf);
  return std::make_unique<FilteredLeafStream>(base, tree, leaf);
}

}  // namespace itercert
