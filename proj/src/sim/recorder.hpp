#pragma once

// Path, log and snapshot bookkeeping shared by the single-system simulators.

#include <algorithm>

#include "adnet/sim/simulate.hpp"

namespace adnet::detail {

struct Recorder {
  const SimOptions* options;
  std::vector<TrajectoryPath>* node_paths;
  std::vector<TrajectoryPath>* edge_paths;
  EventLog* log;
  std::vector<Snapshot>* snapshots;
  std::vector<double> snapshot_times;
  std::size_t next_snapshot = 0;

  void start(const NetworkState& s, double T) {
    const std::size_t n = s.n;
    node_paths->assign(n, {});
    for (std::size_t j = 0; j < n; ++j) {
      (*node_paths)[j].initial = s.sigma[j];
      (*node_paths)[j].horizon = T;
    }
    if (options->record_edge_paths) {
      edge_paths->assign(n * n, {});
      for (std::size_t i = 0; i < n * n; ++i) {
        (*edge_paths)[i].initial = s.edges[i];
        (*edge_paths)[i].horizon = T;
      }
    }
    snapshot_times = options->snapshot_times;
    std::sort(snapshot_times.begin(), snapshot_times.end());
  }

  /// Captures snapshots for times strictly before t and not after T.
  void snapshots_before(const NetworkState& s, double t, double T) {
    while (next_snapshot < snapshot_times.size() && snapshot_times[next_snapshot] < t &&
           snapshot_times[next_snapshot] <= T) {
      snapshots->push_back({snapshot_times[next_snapshot], s.sigma, s.edges});
      ++next_snapshot;
    }
  }

  void node(double t, std::size_t j, State from, State to, Channel channel = Channel::Single) {
    (*node_paths)[j].push(t, to);
    if (options->record_log)
      log->events.push_back({t, EventKind::Node, static_cast<std::uint32_t>(j),
                             static_cast<std::uint32_t>(j), from, to, channel});
  }

  void edge(const NetworkState& s, double t, std::size_t j, std::size_t k, State from, State to,
            Channel channel = Channel::Single) {
    if (options->record_edge_paths) {
      (*edge_paths)[j * s.n + k].push(t, to);
      if (s.symmetric && j != k) (*edge_paths)[k * s.n + j].push(t, to);
    }
    if (options->record_log)
      log->events.push_back({t, EventKind::Edge, static_cast<std::uint32_t>(j),
                             static_cast<std::uint32_t>(k), from, to, channel});
  }
};

inline void check_common(const ValidatedModel& model, std::size_t n, double T) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "simulation needs n >= 2");
  if (!(T > 0.0) || T > model.horizon * (1.0 + 1e-12))
    fail(ErrorCode::InvalidArgument, "simulation horizon must lie in (0, model horizon]");
}

inline void check_bound(double f, double bound) {
  if (f > bound * (1.0 + 1e-12))
    fail(ErrorCode::RateBoundViolated, "node rate exceeds the declared bound f_max");
}

}  // namespace adnet::detail
