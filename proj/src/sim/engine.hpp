#pragma once

// Event-selection structures shared by the simulators.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "adnet/rng.hpp"
#include "adnet/sim/network.hpp"

namespace adnet::detail {

/// Complete binary tree of nonnegative leaf weights. Inner nodes are always
/// recomputed from their children, so totals never accumulate drift.
class SumTree {
 public:
  void reset(std::size_t leaves);
  void set(std::size_t i, double v);
  double total() const { return tree_.size() > 1 ? tree_[1] : 0.0; }
  /// Leaf whose cumulative interval contains u in [0, total()).
  std::size_t find(double u) const;
  double leaf(std::size_t i) const { return tree_[width_ + i]; }
  /// Writes a leaf without updating its ancestors; call rebuild() after.
  void stage(std::size_t i, double v) { tree_[width_ + i] = v; }
  /// Recomputes every inner node from the leaves (O(leaves)).
  void rebuild();

 private:
  std::size_t width_ = 0;
  std::size_t leaves_ = 0;
  std::vector<double> tree_;
};

/// Partition of item ids into classes with O(1) insert, move and uniform
/// member sampling (swap-remove member arrays plus a position index).
class ClassMembers {
 public:
  void reset(std::size_t classes, std::size_t max_id);
  void insert(std::uint32_t id, std::size_t c);
  /// Returns true when the class changed.
  bool move(std::uint32_t id, std::size_t c);
  std::size_t size(std::size_t c) const { return members_[c].size(); }
  std::uint32_t member(std::size_t c, std::size_t i) const { return members_[c][i]; }
  std::size_t class_of(std::uint32_t id) const { return class_of_[id]; }
  std::size_t classes() const { return members_.size(); }

 private:
  std::vector<std::vector<std::uint32_t>> members_;
  std::vector<std::uint32_t> pos_;
  std::vector<std::uint32_t> class_of_;
};

/// Edge events of one system, grouped by source row. Row j covers targets
/// k != j (k > j in symmetric mode, where one row entry stands for the
/// mirrored pair; k == j too when self edges are part of the state). A row
/// keeps counts over (edge state, target state) and member lists by edge
/// state alone, so a node flip only rewrites counts and row totals, while
/// member lists change on edge events only. A draw picks a row by its total,
/// a (b, target state) class by count x exit rate, then a uniform member of
/// the b list, rejected until the target state matches.
class EdgeEngine {
 public:
  EdgeEngine(const ValidatedModel& model, const NetworkState& state);

  double total() const { return tree_.total(); }

  struct Pick {
    std::uint32_t j, k;
    State from, to;
  };
  Pick sample(Rng& rng) const;

  void edge_changed(const NetworkState& state, std::size_t j, std::size_t k);
  void node_changed(const NetworkState& state, std::size_t k);

 private:
  /// Source-state part of the rate; autonomous rates ignore it.
  State source_state(std::size_t j) const { return autonomous_ ? State{0} : sigma_[j]; }
  bool in_row(std::size_t j, std::size_t k) const {
    return k == j ? self_ : (!symmetric_ || k > j);
  }
  double row_total(std::size_t j) const;

  const EdgeRateSpec* spec_;
  std::size_t n_, G_, E_, F_;
  bool symmetric_, autonomous_, self_;
  std::vector<State> sigma_;          // node states as the counts see them
  std::vector<double> exit_;          // [(b * G + sj) * G + sk]
  std::vector<std::int32_t> counts_;  // [j * F + b * G + sk] over the row
  ClassMembers members_;              // class j * E + b, id j * n + k
  mutable std::vector<double> scratch_;
  SumTree tree_;
};

}  // namespace adnet::detail
