#include "adnet/metrics/measure.hpp"

#include <algorithm>

#include "adnet/metrics/transport.hpp"

namespace adnet {

MeasureSample empirical_measure_from_sim(std::span<const TrajectoryPath> paths,
                                         std::span<const Position> positions) {
  if (paths.size() != positions.size())
    fail(ErrorCode::LengthMismatch, "paths and positions differ in length");
  if (paths.empty()) fail(ErrorCode::EmptyMeasure, "no paths");
  MeasureSample out;
  const double w = 1.0 / static_cast<double>(paths.size());
  out.horizon = paths.front().horizon;
  out.particles.reserve(paths.size());
  for (std::size_t j = 0; j < paths.size(); ++j) {
    out.particles.push_back({positions[j], paths[j], w});
    out.horizon = std::min(out.horizon, paths[j].horizon);
  }
  return out;
}

std::vector<double> cost_matrix(const SpatialDomain& domain, const MeasureSample& a,
                                const MeasureSample& b, double t) {
  const std::size_t m = a.size(), n = b.size();
  std::vector<double> cost(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const Particle& p = a.particles[i];
    for (std::size_t j = 0; j < n; ++j) {
      const Particle& q = b.particles[j];
      cost[i * n + j] = domain.distance(p.position, q.position) + path_distance(p.path, q.path, t);
    }
  }
  return cost;
}

double wasserstein(const SpatialDomain& domain, const MeasureSample& a, const MeasureSample& b,
                   double t) {
  if (a.size() > kWassersteinSizeLimit || b.size() > kWassersteinSizeLimit)
    fail(ErrorCode::SizeLimitExceeded,
         "wasserstein accepts at most " + std::to_string(kWassersteinSizeLimit) + " particles");
  if (a.particles.empty() || b.particles.empty())
    fail(ErrorCode::EmptyMeasure, "wasserstein of an empty sample");
  const auto cost = cost_matrix(domain, a, b, t);
  std::vector<double> wa, wb;
  wa.reserve(a.size());
  wb.reserve(b.size());
  for (const auto& p : a.particles) wa.push_back(p.weight);
  for (const auto& p : b.particles) wb.push_back(p.weight);
  return solve_transport(wa, wb, cost).cost;
}

}  // namespace adnet
