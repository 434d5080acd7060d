#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "adnet/metrics/path.hpp"

namespace adnet {

/// Mass table over (cell_j, cell_k, edge state a, node state alpha) stored
/// [((i * cells + j) * E + a) * G + alpha].
struct PairTable {
  std::size_t cells = 0;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::vector<double> mass;

  PairTable() = default;
  PairTable(std::size_t cells_, std::size_t G, std::size_t E)
      : cells(cells_), node_count(G), edge_count(E), mass(cells_ * cells_ * G * E, 0.0) {}

  double& at(std::size_t i, std::size_t j, std::size_t a, std::size_t alpha) {
    return mass[((i * cells + j) * edge_count + a) * node_count + alpha];
  }
  double at(std::size_t i, std::size_t j, std::size_t a, std::size_t alpha) const {
    return mass[((i * cells + j) * edge_count + a) * node_count + alpha];
  }
  double total() const;
};

/// n^-2 sum over ordered pairs j != k (and j == k when self edges are part of
/// the state) of a point mass at (cell(theta_j), cell(theta_k), J^{jk}, sigma^k).
/// edges is row-major n x n.
PairTable pair_empirical_measure(const SpatialDomain& domain, std::size_t G, std::size_t E,
                                 std::span<const State> nodes, std::span<const State> edges,
                                 std::span<const Position> positions,
                                 bool include_self_edges = false);

/// Same, reading node and edge paths at time t (edge paths row-major n x n).
PairTable pair_empirical_measure(const SpatialDomain& domain, std::size_t G, std::size_t E,
                                 std::span<const TrajectoryPath> node_paths,
                                 std::span<const TrajectoryPath> edge_paths,
                                 std::span<const Position> positions, double t,
                                 bool include_self_edges = false);

struct TestFunction {
  std::string name;
  std::function<double(const Position&, const Position&)> h;
};

/// Versioned test-function family ("tf-v1"). Torus: 1, cos/sin 2 pi x,
/// cos/sin 2 pi y, cos 2 pi (x - y), exp(-(d/0.25)^2). Point sets: 1, d/diam,
/// exp(-(2 d/diam)^2).
std::vector<TestFunction> test_functions(const SpatialDomain& domain);
inline constexpr const char* kTestFunctionVersion = "tf-v1";

/// sup over (alpha, a, h) of |sum_ij h(theta_i, theta_j) (lhs - rhs)[i, j, a, alpha]|.
/// Throws BinningMismatch when the tables have different shapes.
double theorem2_error(const SpatialDomain& domain, const PairTable& empirical,
                      const PairTable& limit, std::span<const TestFunction> family);
double theorem2_error(const SpatialDomain& domain, const PairTable& empirical,
                      const PairTable& limit);

}  // namespace adnet
