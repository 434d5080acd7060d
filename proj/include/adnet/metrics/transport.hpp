#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace adnet {

struct TransportResult {
  double cost = 0.0;
  std::vector<double> flow;  // row-major supply x demand
  std::size_t pivots = 0;
};

/// Exact balanced transportation problem solved by the primal network simplex
/// method (strongly feasible spanning trees, block-search pricing). Supplies
/// and demands must be nonnegative with equal totals (relative 1e-9); the
/// demand vector is rescaled to the supply total before solving.
TransportResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                                std::span<const double> cost);

}  // namespace adnet
