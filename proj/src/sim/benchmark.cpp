#include "adnet/sim/benchmark.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>

#include "adnet/error.hpp"
#include "adnet/rng.hpp"
#include "adnet/sim/simulate.hpp"

namespace adnet {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    fail(ErrorCode::LengthMismatch, "slope needs two equally long series of length >= 2");
  double mx = 0.0, my = 0.0;
  const auto m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      fail(ErrorCode::InvalidArgument, "log-log slope needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ScalingReport node_event_scaling(const ValidatedModel& model, const std::vector<std::size_t>& sizes,
                                 double T, std::uint64_t seed, std::size_t repeats) {
  ScalingReport report;
  SimOptions options;
  options.record_log = false;
  options.time_node_events = true;
  std::vector<double> xs, ys;
  for (std::size_t n : sizes) {
    ScalingPoint point;
    point.n = n;
    double seconds = 0.0;
    const auto positions = model.domain.default_positions(n);
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t r = 0; r < std::max<std::size_t>(repeats, 1); ++r) {
      const SimResult run =
          simulate_network(model, n, positions, T, derive_seed(seed, "scaling", {n, r}), options);
      point.node_events += run.stats.node_events;
      point.edge_events += run.stats.edge_events;
      seconds += run.stats.node_event_seconds;
    }
    point.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    point.seconds_per_node_event =
        point.node_events ? seconds / static_cast<double>(point.node_events) : 0.0;
    report.points.push_back(point);
    if (point.seconds_per_node_event > 0.0) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(point.seconds_per_node_event);
    }
  }
  if (xs.size() >= 2) report.exponent = loglog_slope(xs, ys);
  return report;
}

}  // namespace adnet
