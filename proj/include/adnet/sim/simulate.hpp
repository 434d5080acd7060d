#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adnet/field/field.hpp"
#include "adnet/metrics/measure.hpp"
#include "adnet/sim/events.hpp"

namespace adnet {

struct SimOptions {
  bool include_self_edges = false;
  bool record_edge_paths = false;
  bool record_log = true;
  std::uint64_t max_events = 100'000'000;
  /// States are captured just after all events with time <= s.
  std::vector<double> snapshot_times;
  /// Every this many events the field tables are checked against a recount
  /// (0 disables). A mismatch throws.
  std::uint64_t audit_interval = 0;
  /// Accumulate wall time spent applying accepted node events.
  bool time_node_events = false;
};

struct SimStats {
  std::uint64_t node_events = 0;
  std::uint64_t edge_events = 0;
  std::uint64_t rejected_proposals = 0;
  double node_event_seconds = 0.0;
};

struct Snapshot {
  double time = 0.0;
  std::vector<State> sigma;
  std::vector<State> edges;
};

struct SimResult {
  std::vector<TrajectoryPath> node_paths;
  std::vector<TrajectoryPath> edge_paths;  // n x n row-major when recorded
  EventLog log;
  NetworkState initial;
  NetworkState final;
  std::vector<Snapshot> snapshots;
  SimStats stats;
};

/// Exact event-driven simulation of the interacting system on [0, T]. Node
/// transitions are proposed at the constant total bound n (|G| - 1) f_max and
/// accepted with probability f / f_max; edge events pick a source row from a
/// sum tree over row totals, then a target by its exit rate.
/// Throws RateBoundViolated.
SimResult simulate_network(const ValidatedModel& model, std::size_t n,
                           std::span<const Position> positions, double T, std::uint64_t seed,
                           const SimOptions& options = {});

/// As above from a given initial state; randomness from `seed` drives the
/// dynamics only.
SimResult simulate_network_from(const ValidatedModel& model, const NetworkState& initial,
                                double T, std::uint64_t seed, const SimOptions& options = {});

/// Uniform grid of `points` times on [0, T] including both ends.
std::vector<double> uniform_grid(double T, std::size_t points);

struct DecoupledOptions {
  SimOptions sim;
  std::size_t grid_points = 256;
  std::size_t subsample = 0;  // 0: default_subsample(M)
  bool record_fields = true;
};

struct DecoupledResult {
  std::vector<TrajectoryPath> node_paths;
  std::vector<TrajectoryPath> edge_paths;
  std::vector<FieldPath> fields;  // per node, on `grid`
  std::vector<double> grid;
  EventLog log;
  NetworkState initial;
  NetworkState final;
  std::vector<Snapshot> snapshots;
  SimStats stats;
};

/// Intermediate system: node j flips alpha -> beta at f(psi_{theta_j, t}(sigma~^j, mu))
/// against the frozen law mu (thinning with bound f_max); edges flip at
/// l(sigma~^j, sigma~^k). Throws LawHorizonTooShort when mu does not cover T.
DecoupledResult simulate_decoupled(const ValidatedModel& model, std::size_t n,
                                   std::span<const Position> positions, double T,
                                   const MeasureSample& mu, std::uint64_t seed,
                                   const DecoupledOptions& options = {});

struct DiscrepancySeries {
  std::vector<double> times;
  std::vector<double> delta;
  std::vector<double> phi;
  std::vector<double> eta;
  std::vector<double> node_residual;  // n^-1 sum_j sum_{alpha != beta} (f` + f^)
  std::vector<double> edge_residual;  // n^-2 sum_{j,k} sum_{a != b} (l` + l^)
};

struct CoupledOptions {
  SimOptions sim;
  std::size_t grid_points = 256;
  /// Also sample the series just before every event (small n only).
  bool every_event = false;
  std::size_t subsample = 0;
};

struct CoupledResult {
  NetworkState initial;
  NetworkState interacting;
  NetworkState decoupled;
  std::vector<TrajectoryPath> interacting_paths;
  std::vector<TrajectoryPath> decoupled_paths;
  EventLog log;
  DiscrepancySeries series;
  std::uint64_t residual_node_firings = 0;
  std::uint64_t residual_edge_firings = 0;
  SimStats stats;
};

/// Interacting and decoupled systems from a shared initial network, driven
/// by shared minimum-intensity channels plus residual channels.
CoupledResult simulate_coupled(const ValidatedModel& model, std::size_t n,
                               std::span<const Position> positions, double T,
                               const MeasureSample& mu, std::uint64_t seed,
                               const CoupledOptions& options = {});

/// sum_{alpha != beta} |f(g) chi{s = alpha} - f(g~) chi{s~ = alpha}| for one node.
double node_residual_intensity(const NodeRateSpec& spec, State s, State s_tilde,
                               std::span<const double> g, std::span<const double> g_tilde);

struct IntensityBoundReport {
  std::vector<double> times;
  std::vector<double> lhs_node, rhs_node, lhs_edge, rhs_edge;
  bool holds = true;
};

IntensityBoundReport check_intensity_bound(const DiscrepancySeries& series, double c_T);

/// |G| (lip_f + 2 f_max + l_max |E|) + 1.
double default_intensity_constant(const ValidatedModel& model);

}  // namespace adnet
