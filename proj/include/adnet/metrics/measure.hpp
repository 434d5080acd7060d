#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adnet/metrics/path.hpp"

namespace adnet {

struct Particle {
  Position position{0.0, 0.0};
  TrajectoryPath path;
  double weight = 0.0;
  bool operator==(const Particle&) const = default;
};

/// Weighted particle law on (position, path). Weights are nonnegative and sum
/// to 1; every path covers [0, horizon].
struct MeasureSample {
  std::vector<Particle> particles;
  double horizon = 0.0;
  std::uint64_t generation = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return particles.size(); }
  bool operator==(const MeasureSample&) const = default;
};

/// Uniform-weight law over (positions[j], paths[j]). Throws LengthMismatch.
MeasureSample empirical_measure_from_sim(std::span<const TrajectoryPath> paths,
                                         std::span<const Position> positions);

/// Largest sample size accepted by wasserstein.
inline constexpr std::size_t kWassersteinSizeLimit = 2000;

/// Exact optimal transport cost between the weighted samples with ground cost
/// d(theta, theta') + d_t(x, y). Throws SizeLimitExceeded or HorizonMismatch.
double wasserstein(const SpatialDomain& domain, const MeasureSample& a, const MeasureSample& b,
                   double t);

/// Ground-cost matrix (rows: a, columns: b), row-major.
std::vector<double> cost_matrix(const SpatialDomain& domain, const MeasureSample& a,
                                const MeasureSample& b, double t);

}  // namespace adnet
