#include "adnet/metrics/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "adnet/error.hpp"

namespace adnet {
namespace {

// Nodes: sources [0, m), sinks [m, m + n), root m + n. Arcs: real arcs
// e = i * n + j (source i -> sink m + j, uncapacitated) followed by one
// artificial arc per non-root node joining it to the root. Reduced cost of an
// arc is cost + pi[src] - pi[tgt]; tree arcs have reduced cost 0.
class NetworkSimplex {
 public:
  NetworkSimplex(std::span<const double> supply, std::span<const double> demand,
                 std::span<const double> cost)
      : m_(static_cast<std::int64_t>(supply.size())),
        n_(static_cast<std::int64_t>(demand.size())),
        root_(m_ + n_),
        real_arcs_(m_ * n_),
        cost_(cost) {
    const std::int64_t nodes = m_ + n_ + 1;
    const std::int64_t arcs = real_arcs_ + m_ + n_;
    flow_.assign(static_cast<std::size_t>(arcs), 0.0);
    in_tree_.assign(static_cast<std::size_t>(real_arcs_), 0);
    art_src_.resize(static_cast<std::size_t>(m_ + n_));
    art_tgt_.resize(static_cast<std::size_t>(m_ + n_));
    art_cost_.resize(static_cast<std::size_t>(m_ + n_));
    parent_.assign(nodes, -1);
    pred_.assign(nodes, -1);
    forward_.assign(nodes, 0);
    depth_.assign(nodes, 0);
    pi_.assign(nodes, 0.0);
    first_child_.assign(nodes, -1);
    next_sibling_.assign(nodes, -1);
    prev_sibling_.assign(nodes, -1);

    double max_cost = 0.0;
    for (const double c : cost) max_cost = std::max(max_cost, std::fabs(c));
    const double art = (max_cost + 1.0) * static_cast<double>(nodes);

    for (std::int64_t u = 0; u < m_ + n_; ++u) {
      const double net = u < m_ ? supply[u] : -demand[u - m_];
      const auto k = static_cast<std::size_t>(u);
      const std::int64_t arc = real_arcs_ + u;
      parent_[u] = root_;
      pred_[u] = arc;
      depth_[u] = 1;
      attach(u, root_);
      if (net >= 0.0) {
        art_src_[k] = u;
        art_tgt_[k] = root_;
        art_cost_[k] = 0.0;
        forward_[u] = 1;
        flow_[arc] = net;
        pi_[u] = 0.0;
      } else {
        art_src_[k] = root_;
        art_tgt_[k] = u;
        art_cost_[k] = art;
        forward_[u] = 0;
        flow_[arc] = -net;
        pi_[u] = art;
      }
    }
    block_ = std::max<std::int64_t>(10, static_cast<std::int64_t>(std::sqrt(static_cast<double>(real_arcs_))));
  }

  void run() {
    initial_pivots();
    while (find_entering()) pivot();
  }

  double total_cost() const {
    double total = 0.0;
    for (std::int64_t e = 0; e < real_arcs_; ++e) total += flow_[e] * cost_[e];
    return total;
  }

  double artificial_flow() const {
    double total = 0.0;
    for (std::int64_t u = 0; u < m_ + n_; ++u) {
      // Arcs joining zero-balance nodes to the root may stay in the basis.
      if (art_cost_[u] > 0.0) total += flow_[real_arcs_ + u];
    }
    return total;
  }

  std::vector<double> flows() const {
    return {flow_.begin(), flow_.begin() + real_arcs_};
  }

  std::size_t pivots() const { return pivots_; }

 private:
  std::int64_t src(std::int64_t e) const {
    return e < real_arcs_ ? e / n_ : art_src_[e - real_arcs_];
  }
  std::int64_t tgt(std::int64_t e) const {
    return e < real_arcs_ ? m_ + e % n_ : art_tgt_[e - real_arcs_];
  }
  double arc_cost(std::int64_t e) const {
    return e < real_arcs_ ? cost_[e] : art_cost_[e - real_arcs_];
  }

  void attach(std::int64_t child, std::int64_t par) {
    prev_sibling_[child] = -1;
    next_sibling_[child] = first_child_[par];
    if (first_child_[par] >= 0) prev_sibling_[first_child_[par]] = child;
    first_child_[par] = child;
  }

  void detach(std::int64_t child, std::int64_t par) {
    if (prev_sibling_[child] >= 0)
      next_sibling_[prev_sibling_[child]] = next_sibling_[child];
    else
      first_child_[par] = next_sibling_[child];
    if (next_sibling_[child] >= 0) prev_sibling_[next_sibling_[child]] = prev_sibling_[child];
    prev_sibling_[child] = next_sibling_[child] = -1;
  }

  bool negative(double rc, std::int64_t e) const {
    const double scale = std::max({std::fabs(pi_[src(e)]), std::fabs(pi_[tgt(e)]),
                                   std::fabs(arc_cost(e)), 1.0});
    return rc < -kEpsilon * scale;
  }

  // Block search pricing: scan arcs cyclically, stop after the first block
  // that contains an improving arc and take the most negative one seen.
  bool find_entering() {
    double best = 0.0;
    std::int64_t best_arc = -1;
    std::int64_t e = next_arc_;
    std::int64_t i = e / n_, j = e % n_;
    std::int64_t count = block_;
    for (std::int64_t scanned = 0; scanned < real_arcs_; ++scanned) {
      if (!in_tree_[e]) {
        const double rc = cost_[e] + pi_[i] - pi_[m_ + j];
        if (rc < best) {
          best = rc;
          best_arc = e;
        }
      }
      ++e;
      if (++j == n_) {
        j = 0;
        ++i;
      }
      if (e == real_arcs_) {
        e = 0;
        i = 0;
        j = 0;
      }
      if (--count == 0) {
        if (best_arc >= 0 && negative(best, best_arc)) {
          next_arc_ = e;
          entering_ = best_arc;
          return true;
        }
        count = block_;
      }
    }
    if (best_arc >= 0 && negative(best, best_arc)) {
      next_arc_ = e;
      entering_ = best_arc;
      return true;
    }
    return false;
  }

  void initial_pivots() {
    for (std::int64_t j = 0; j < n_; ++j) {
      std::int64_t best = -1;
      double best_cost = std::numeric_limits<double>::infinity();
      for (std::int64_t i = 0; i < m_; ++i) {
        const double c = cost_[i * n_ + j];
        if (c < best_cost) {
          best_cost = c;
          best = i * n_ + j;
        }
      }
      if (best < 0 || in_tree_[best]) continue;
      const double rc = cost_[best] + pi_[src(best)] - pi_[tgt(best)];
      if (!negative(rc, best)) continue;
      entering_ = best;
      pivot();
    }
  }

  void pivot() {
    ++pivots_;
    const std::int64_t e = entering_;
    const std::int64_t u = src(e), v = tgt(e);

    std::int64_t a = u, b = v;
    while (a != b) {
      if (depth_[a] > depth_[b]) {
        a = parent_[a];
      } else if (depth_[b] > depth_[a]) {
        b = parent_[b];
      } else {
        a = parent_[a];
        b = parent_[b];
      }
    }
    const std::int64_t join = a;

    // Strongly feasible leaving-arc rule: strict on the source side,
    // non-strict on the target side, so the last blocking arc on the cycle
    // (oriented from the join) leaves.
    double delta = std::numeric_limits<double>::infinity();
    std::int64_t u_out = -1;
    int side = 0;
    for (std::int64_t x = u; x != join; x = parent_[x]) {
      if (forward_[x] && flow_[pred_[x]] < delta) {
        delta = flow_[pred_[x]];
        u_out = x;
        side = 1;
      }
    }
    for (std::int64_t x = v; x != join; x = parent_[x]) {
      if (!forward_[x] && flow_[pred_[x]] <= delta) {
        delta = flow_[pred_[x]];
        u_out = x;
        side = 2;
      }
    }
    if (side == 0) fail(ErrorCode::InvalidArgument, "transport problem is unbounded");

    if (delta > 0.0) {
      flow_[e] += delta;
      for (std::int64_t x = u; x != join; x = parent_[x])
        flow_[pred_[x]] += forward_[x] ? -delta : delta;
      for (std::int64_t x = v; x != join; x = parent_[x])
        flow_[pred_[x]] += forward_[x] ? delta : -delta;
    }

    const std::int64_t leaving = pred_[u_out];
    const std::int64_t u_in = side == 1 ? u : v;
    const std::int64_t v_in = side == 1 ? v : u;

    path_.clear();
    for (std::int64_t x = u_in;; x = parent_[x]) {
      path_.push_back(x);
      if (x == u_out) break;
    }
    saved_pred_.resize(path_.size());
    saved_forward_.resize(path_.size());
    for (std::size_t k = 0; k < path_.size(); ++k) {
      const std::int64_t x = path_[k];
      detach(x, parent_[x]);
      saved_pred_[k] = pred_[x];
      saved_forward_[k] = forward_[x];
    }
    parent_[u_in] = v_in;
    pred_[u_in] = e;
    forward_[u_in] = src(e) == u_in ? 1 : 0;
    attach(u_in, v_in);
    for (std::size_t k = 1; k < path_.size(); ++k) {
      const std::int64_t x = path_[k], child = path_[k - 1];
      parent_[x] = child;
      pred_[x] = saved_pred_[k - 1];
      forward_[x] = saved_forward_[k - 1] ? 0 : 1;
      attach(x, child);
    }

    if (e < real_arcs_) in_tree_[e] = 1;
    if (leaving < real_arcs_) in_tree_[leaving] = 0;

    const double rc = arc_cost(e) + pi_[u] - pi_[v];
    const double shift = u_in == u ? -rc : rc;
    stack_.clear();
    stack_.push_back(u_in);
    while (!stack_.empty()) {
      const std::int64_t x = stack_.back();
      stack_.pop_back();
      pi_[x] += shift;
      depth_[x] = depth_[parent_[x]] + 1;
      for (std::int64_t c = first_child_[x]; c >= 0; c = next_sibling_[c]) stack_.push_back(c);
    }
  }

  static constexpr double kEpsilon = 64.0 * std::numeric_limits<double>::epsilon();

  std::int64_t m_, n_, root_, real_arcs_;
  std::span<const double> cost_;
  std::vector<double> flow_;
  std::vector<std::uint8_t> in_tree_;
  std::vector<std::int64_t> art_src_, art_tgt_;
  std::vector<double> art_cost_;
  std::vector<std::int64_t> parent_, pred_, depth_;
  std::vector<std::uint8_t> forward_;
  std::vector<double> pi_;
  std::vector<std::int64_t> first_child_, next_sibling_, prev_sibling_;
  std::vector<std::int64_t> path_, saved_pred_, stack_;
  std::vector<std::uint8_t> saved_forward_;
  std::int64_t block_ = 10;
  std::int64_t next_arc_ = 0;
  std::int64_t entering_ = -1;
  std::size_t pivots_ = 0;
};

}  // namespace

TransportResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                                std::span<const double> cost) {
  if (supply.empty() || demand.empty())
    fail(ErrorCode::EmptyMeasure, "transport between empty measures");
  if (cost.size() != supply.size() * demand.size())
    fail(ErrorCode::LengthMismatch, "cost matrix does not match the marginals");
  for (const double c : cost)
    if (!std::isfinite(c)) fail(ErrorCode::InvalidArgument, "non-finite transport cost");
  const double total_a = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double total_b = std::accumulate(demand.begin(), demand.end(), 0.0);
  for (const double x : supply)
    if (!(x >= 0.0)) fail(ErrorCode::InvalidArgument, "negative supply");
  for (const double x : demand)
    if (!(x >= 0.0)) fail(ErrorCode::InvalidArgument, "negative demand");
  if (!(total_a > 0.0) || std::fabs(total_a - total_b) > 1e-9 * total_a)
    fail(ErrorCode::InvalidArgument, "transport marginals have different mass");

  // Exact balance: rescale the demand and push the remaining roundoff into
  // its largest entry.
  std::vector<double> b(demand.begin(), demand.end());
  const double scale = total_a / total_b;
  for (double& x : b) x *= scale;
  const double residual = total_a - std::accumulate(b.begin(), b.end(), 0.0);
  *std::max_element(b.begin(), b.end()) += residual;

  NetworkSimplex solver(supply, b, cost);
  solver.run();
  if (solver.artificial_flow() > 1e-9 * total_a)
    fail(ErrorCode::InvalidArgument, "transport problem left flow on artificial arcs");
  TransportResult result;
  result.cost = solver.total_cost();
  result.flow = solver.flows();
  result.pivots = solver.pivots();
  return result;
}

}  // namespace adnet
