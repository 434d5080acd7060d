#pragma once

#include <cstdint>
#include <vector>

#include "adnet/model/model.hpp"

namespace adnet {

struct ScalingPoint {
  std::size_t n = 0;
  std::uint64_t node_events = 0;
  std::uint64_t edge_events = 0;
  double seconds_per_node_event = 0.0;
  double wall_seconds = 0.0;
};

struct ScalingReport {
  std::vector<ScalingPoint> points;
  double exponent = 0.0;  // least-squares slope of log cost against log n
};

/// Times accepted node events of simulate_network over the given sizes
/// (positions on the default grid), repeating each size `repeats` times.
ScalingReport node_event_scaling(const ValidatedModel& model, const std::vector<std::size_t>& sizes,
                                 double T, std::uint64_t seed, std::size_t repeats = 1);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace adnet
