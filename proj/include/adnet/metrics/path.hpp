#pragma once

#include <cstddef>
#include <vector>

#include "adnet/model/model.hpp"

namespace adnet {

struct Jump {
  double time;
  State state;
  bool operator==(const Jump&) const = default;
};

/// Right-continuous piecewise-constant path on [0, horizon]: the value at t is
/// the state after the last jump with time <= t. Jump times are strictly
/// increasing in (0, horizon] and consecutive states differ.
struct TrajectoryPath {
  State initial = 0;
  std::vector<Jump> jumps;
  double horizon = 0.0;

  State at(double t) const;
  State final_state() const { return jumps.empty() ? initial : jumps.back().state; }
  /// Appends a jump; a jump to the current state is ignored.
  void push(double t, State s);
  /// Number of jumps with time <= t.
  std::size_t jumps_until(double t) const;
  /// Throws InvalidArgument when the path invariants fail.
  void check() const;

  bool operator==(const TrajectoryPath&) const = default;
};

/// Occupation distance: Lebesgue measure of {s in [0, t] : x_s != y_s}.
/// Throws HorizonMismatch when t exceeds either path's horizon.
double path_distance(const TrajectoryPath& x, const TrajectoryPath& y, double t);

}  // namespace adnet
