#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "adnet/metrics/pair.hpp"

namespace adnet {

double PairTable::total() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

PairTable pair_empirical_measure(const SpatialDomain& domain, std::size_t G, std::size_t E,
                                 std::span<const State> nodes, std::span<const State> edges,
                                 std::span<const Position> positions, bool include_self_edges) {
  const std::size_t n = nodes.size();
  if (positions.size() != n || edges.size() != n * n)
    fail(ErrorCode::LengthMismatch, "pair measure inputs have inconsistent sizes");
  PairTable table(domain.size(), G, E);
  std::vector<std::size_t> cell(n);
  for (std::size_t j = 0; j < n; ++j) cell[j] = domain.cell_of(positions[j]);
  const double w = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      if (j == k && !include_self_edges) continue;
      table.at(cell[j], cell[k], edges[j * n + k], nodes[k]) += w;
    }
  return table;
}

PairTable pair_empirical_measure(const SpatialDomain& domain, std::size_t G, std::size_t E,
                                 std::span<const TrajectoryPath> node_paths,
                                 std::span<const TrajectoryPath> edge_paths,
                                 std::span<const Position> positions, double t,
                                 bool include_self_edges) {
  const std::size_t n = node_paths.size();
  if (edge_paths.size() != n * n)
    fail(ErrorCode::LengthMismatch, "edge paths must be an n x n array");
  std::vector<State> nodes(n), edges(n * n, 0);
  for (std::size_t j = 0; j < n; ++j) nodes[j] = node_paths[j].at(t);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (j != k || include_self_edges) edges[j * n + k] = edge_paths[j * n + k].at(t);
  return pair_empirical_measure(domain, G, E, nodes, edges, positions, include_self_edges);
}

std::vector<TestFunction> test_functions(const SpatialDomain& domain) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<TestFunction> out;
  out.push_back({"one", [](const Position&, const Position&) { return 1.0; }});
  if (domain.kind == DomainKind::Torus) {
    out.push_back({"cos_x", [](const Position& x, const Position&) { return std::cos(two_pi * x[0]); }});
    out.push_back({"sin_x", [](const Position& x, const Position&) { return std::sin(two_pi * x[0]); }});
    out.push_back({"cos_y", [](const Position&, const Position& y) { return std::cos(two_pi * y[0]); }});
    out.push_back({"sin_y", [](const Position&, const Position& y) { return std::sin(two_pi * y[0]); }});
    out.push_back({"cos_x_minus_y", [](const Position& x, const Position& y) {
                     return std::cos(two_pi * (x[0] - y[0]));
                   }});
    out.push_back({"bump", [&domain](const Position& x, const Position& y) {
                     const double d = domain.distance(x, y) / 0.25;
                     return std::exp(-d * d);
                   }});
  } else {
    const double diam = std::max(domain.diameter(), 1e-300);
    out.push_back({"distance", [&domain, diam](const Position& x, const Position& y) {
                     return domain.distance(x, y) / diam;
                   }});
    out.push_back({"bump", [&domain, diam](const Position& x, const Position& y) {
                     const double d = 2.0 * domain.distance(x, y) / diam;
                     return std::exp(-d * d);
                   }});
  }
  return out;
}

double theorem2_error(const SpatialDomain& domain, const PairTable& empirical,
                      const PairTable& limit, std::span<const TestFunction> family) {
  if (empirical.cells != limit.cells || empirical.node_count != limit.node_count ||
      empirical.edge_count != limit.edge_count || empirical.cells != domain.size())
    fail(ErrorCode::BinningMismatch, "pair tables use different binnings");
  const std::size_t Q = empirical.cells, G = empirical.node_count, E = empirical.edge_count;
  std::vector<double> diff(empirical.mass.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = empirical.mass[i] - limit.mass[i];
  double worst = 0.0;
  std::vector<double> acc(G * E);
  for (const TestFunction& tf : family) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < Q; ++i)
      for (std::size_t j = 0; j < Q; ++j) {
        const double h = tf.h(domain.nodes[i], domain.nodes[j]);
        const double* d = diff.data() + (i * Q + j) * G * E;
        for (std::size_t s = 0; s < G * E; ++s) acc[s] += h * d[s];
      }
    for (const double v : acc) worst = std::max(worst, std::fabs(v));
  }
  return worst;
}

double theorem2_error(const SpatialDomain& domain, const PairTable& empirical,
                      const PairTable& limit) {
  const auto family = test_functions(domain);
  return theorem2_error(domain, empirical, limit, family);
}

}  // namespace adnet
