#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adnet/model/model.hpp"

namespace adnet {

/// Node states, edge states and the maintained local-field count tables.
/// counts[j * F + a * G + zeta] = #{k : J^{jk} = a, sigma^k = zeta}, with
/// k = j included only when self edges are part of the state. In symmetric
/// mode edges are stored mirrored (J^{jk} == J^{kj}).
struct NetworkState {
  double time = 0.0;
  std::size_t n = 0;
  std::size_t G = 0;
  std::size_t E = 0;
  bool symmetric = false;
  bool include_self_edges = false;
  std::vector<State> sigma;
  std::vector<State> edges;  // row-major n x n; diagonal 0 without self edges
  std::vector<std::int32_t> counts;

  std::size_t field_size() const { return G * E; }
  State edge(std::size_t j, std::size_t k) const { return edges[j * n + k]; }
  std::span<const std::int32_t> field_counts(std::size_t j) const {
    return {counts.data() + j * field_size(), field_size()};
  }
  /// Maintained G^j = counts / n.
  void field(std::size_t j, std::span<double> out) const;
  /// Rebuilds every count table from (sigma, edges).
  void recount();
  /// True when the maintained tables equal a fresh recount.
  bool counts_consistent() const;

  /// sigma^k <- s, updating all count tables (O(n)).
  void set_node(std::size_t k, State s);
  /// J^{jk} <- a (and J^{kj} in symmetric mode), updating G^j (and G^k).
  void set_edge(std::size_t j, std::size_t k, State a);

  bool operator==(const NetworkState&) const = default;
};

NetworkState make_network_state(const ValidatedModel& model, std::span<const State> sigma,
                                 std::span<const State> edges, bool include_self_edges = false);

/// G^j recomputed from (sigma, edges) by a direct loop over k.
/// Throws IndexOutOfRange.
std::vector<double> local_empirical_measure(const NetworkState& state, std::size_t j);

/// sigma^j ~ rho_{theta_j} independently; then J^{jk} ~ kappa_{theta_j theta_k}(. | sigma^j,
/// sigma^k) independently over ordered pairs (over j < k mirrored in
/// symmetric mode). Throws PositionOutOfDomain.
NetworkState sample_initial_network(const ValidatedModel& model, std::size_t n,
                                    std::span<const Position> positions, std::uint64_t seed,
                                    bool include_self_edges = false);

}  // namespace adnet
