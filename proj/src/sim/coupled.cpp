#include <algorithm>
#include <cmath>

#include "adnet/sim/simulate.hpp"
#include "engine.hpp"

namespace adnet {
namespace {

/// Edge channels of the coupled pair. A pair (j, k) sits in the class keyed by
/// (J, J~, sigma_j, sigma_k, sigma~_j, sigma~_k); for each target b the
/// interacting intensity u_b and decoupled intensity u~_b split into a shared
/// part min(u_b, u~_b) and a residual |u_b - u~_b|, so the class rate is
/// sum_b max(u_b, u~_b).
class CoupledEdges {
 public:
  CoupledEdges(const ValidatedModel& model, const NetworkState& x, const NetworkState& y)
      : spec_(&model.edge),
        n_(x.n),
        G_(x.G),
        E_(x.E),
        symmetric_(x.symmetric),
        autonomous_(model.edge.mode == EdgeMode::Autonomous),
        self_(x.include_self_edges) {
    const std::size_t C = E_ * E_ * G_ * G_ * G_ * G_;
    rate_.assign(C, 0.0);
    residual_.assign(C, 0.0);
    self_count_.assign(C, 0);
    for (std::size_t c = 0; c < C; ++c) {
      std::size_t r = c;
      const std::size_t ys_k = r % G_; r /= G_;
      const std::size_t ys_j = r % G_; r /= G_;
      const std::size_t xs_k = r % G_; r /= G_;
      const std::size_t xs_j = r % G_; r /= G_;
      const std::size_t yb = r % E_; r /= E_;
      const std::size_t xb = r;
      for (std::size_t b = 0; b < E_; ++b) {
        const double u = intensity(xb, b, xs_j, xs_k);
        const double v = intensity(yb, b, ys_j, ys_k);
        rate_[c] += std::max(u, v);
        residual_[c] += std::abs(u - v);
      }
    }
    members_.reset(C, n_ * n_);
    for (std::size_t j = 0; j < n_; ++j) {
      for (std::size_t k = symmetric_ ? j : 0; k < n_; ++k) {
        if (k == j && !self_) continue;
        const std::size_t c = key(x, y, j, k);
        members_.insert(static_cast<std::uint32_t>(j * n_ + k), c);
        if (j == k) ++self_count_[c];
      }
    }
    tree_.reset(C);
    for (std::size_t c = 0; c < C; ++c) refresh(c);
  }

  double total() const { return tree_.total(); }

  struct Pick {
    std::uint32_t j, k;
    State to;
    Channel channel;
  };

  Pick sample(Rng& rng, const NetworkState& x, const NetworkState& y) const {
    const std::size_t c = tree_.find(rng.uniform() * tree_.total());
    const std::uint32_t id = members_.member(c, rng.index(members_.size(c)));
    Pick p;
    p.j = id / static_cast<std::uint32_t>(n_);
    p.k = id % static_cast<std::uint32_t>(n_);
    const std::size_t xb = x.edge(p.j, p.k), yb = y.edge(p.j, p.k);
    double v = rng.uniform() * rate_[c];
    p.to = 0;
    p.channel = Channel::Shared;
    for (std::size_t b = 0; b < E_; ++b) {
      const double u = intensity(xb, b, x.sigma[p.j], x.sigma[p.k]);
      const double w = intensity(yb, b, y.sigma[p.j], y.sigma[p.k]);
      const double m = std::max(u, w);
      if (m <= 0.0) continue;
      p.to = static_cast<State>(b);
      p.channel = v < std::min(u, w) ? Channel::Shared
                  : u > w            ? Channel::InteractingOnly
                                     : Channel::DecoupledOnly;
      if (v < m) break;
      v -= m;
    }
    return p;
  }

  void edge_changed(const NetworkState& x, const NetworkState& y, std::size_t j, std::size_t k) {
    if (symmetric_ && j > k) std::swap(j, k);
    const auto id = static_cast<std::uint32_t>(j * n_ + k);
    const std::size_t old = members_.class_of(id);
    place(x, y, j, k);
    refresh(old);
    refresh(members_.class_of(id));
  }

  void node_changed(const NetworkState& x, const NetworkState& y, std::size_t k) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (j == k) {
        if (self_) place(x, y, k, k);
        continue;
      }
      if (symmetric_) {
        place(x, y, std::min(j, k), std::max(j, k));
      } else {
        place(x, y, j, k);
        place(x, y, k, j);
      }
    }
    for (std::size_t c = 0; c < rate_.size(); ++c) refresh(c);
  }

  /// n^-2 sum over ordered pairs of the residual edge intensity.
  double residual_intensity() const {
    double s = 0.0;
    for (std::size_t c = 0; c < rate_.size(); ++c) {
      if (residual_[c] == 0.0) continue;
      s += residual_[c] * ordered_size(c);
    }
    return s / (static_cast<double>(n_) * static_cast<double>(n_));
  }

  /// Ordered pairs an id stands for: mirrored pairs count twice.
  double weight(std::size_t j, std::size_t k) const { return symmetric_ && j != k ? 2.0 : 1.0; }

 private:
  double intensity(std::size_t from, std::size_t to, std::size_t sj, std::size_t sk) const {
    if (from == to) return 0.0;
    return spec_->rate(from, to, autonomous_ ? 0 : sj, sk);
  }
  std::size_t key(const NetworkState& x, const NetworkState& y, std::size_t j,
                  std::size_t k) const {
    std::size_t c = x.edge(j, k);
    c = c * E_ + y.edge(j, k);
    c = c * G_ + x.sigma[j];
    c = c * G_ + x.sigma[k];
    c = c * G_ + y.sigma[j];
    c = c * G_ + y.sigma[k];
    return c;
  }
  void place(const NetworkState& x, const NetworkState& y, std::size_t j, std::size_t k) {
    const auto id = static_cast<std::uint32_t>(j * n_ + k);
    const std::size_t old = members_.class_of(id);
    const std::size_t c = key(x, y, j, k);
    if (members_.move(id, c) && j == k) {
      --self_count_[old];
      ++self_count_[c];
    }
  }
  double ordered_size(std::size_t c) const {
    const auto size = static_cast<double>(members_.size(c));
    if (!symmetric_) return size;
    return 2.0 * size - static_cast<double>(self_count_[c]);
  }
  void refresh(std::size_t c) { tree_.set(c, rate_[c] * static_cast<double>(members_.size(c))); }

  const EdgeRateSpec* spec_;
  std::size_t n_, G_, E_;
  bool symmetric_, autonomous_, self_;
  std::vector<double> rate_;
  std::vector<double> residual_;
  std::vector<std::size_t> self_count_;
  detail::ClassMembers members_;
  detail::SumTree tree_;
};

void push_path(std::vector<TrajectoryPath>& paths, std::size_t j, double t, State s) {
  paths[j].push(t, s);
}

}  // namespace

double node_residual_intensity(const NodeRateSpec& spec, State s, State s_tilde,
                               std::span<const double> g, std::span<const double> g_tilde) {
  const std::size_t G = spec.node_count;
  double total = 0.0;
  for (std::size_t alpha = 0; alpha < G; ++alpha) {
    if (alpha != s && alpha != s_tilde) continue;
    for (std::size_t beta = 0; beta < G; ++beta) {
      if (beta == alpha) continue;
      const double u = alpha == s ? spec.rate(alpha, beta, g) : 0.0;
      const double v = alpha == s_tilde ? spec.rate(alpha, beta, g_tilde) : 0.0;
      total += std::abs(u - v);
    }
  }
  return total;
}

double default_intensity_constant(const ValidatedModel& model) {
  const auto G = static_cast<double>(model.G());
  const auto E = static_cast<double>(model.E());
  return G * (model.node.lip_f + 2.0 * model.node.f_max + model.edge.l_max * E) + 1.0;
}

IntensityBoundReport check_intensity_bound(const DiscrepancySeries& series, double c_T) {
  IntensityBoundReport report;
  report.times = series.times;
  const std::size_t m = series.times.size();
  report.lhs_node.resize(m);
  report.rhs_node.resize(m);
  report.lhs_edge.resize(m);
  report.rhs_edge.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    report.lhs_node[i] = series.node_residual[i];
    report.rhs_node[i] = c_T * (series.delta[i] + series.phi[i] + series.eta[i]);
    report.lhs_edge[i] = series.edge_residual[i];
    report.rhs_edge[i] = c_T * (series.delta[i] + series.phi[i]);
    const double tol_node = 1e-12 * (1.0 + report.rhs_node[i]);
    const double tol_edge = 1e-12 * (1.0 + report.rhs_edge[i]);
    if (report.lhs_node[i] > report.rhs_node[i] + tol_node ||
        report.lhs_edge[i] > report.rhs_edge[i] + tol_edge)
      report.holds = false;
  }
  return report;
}

CoupledResult simulate_coupled(const ValidatedModel& model, std::size_t n,
                               std::span<const Position> positions, double T,
                               const MeasureSample& mu, std::uint64_t seed,
                               const CoupledOptions& options) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "simulation needs n >= 2");
  if (!(T > 0.0) || T > model.horizon * (1.0 + 1e-12))
    fail(ErrorCode::InvalidArgument, "simulation horizon must lie in (0, model horizon]");
  if (mu.particles.empty()) fail(ErrorCode::EmptyMeasure, "coupled run needs a limit law");
  if (mu.horizon < T * (1.0 - 1e-12))
    fail(ErrorCode::LawHorizonTooShort, "limit law does not cover the simulation horizon");

  CoupledResult result;
  result.initial = sample_initial_network(model, n, positions, seed, options.sim.include_self_edges);
  NetworkState x = result.initial, y = result.initial;
  const std::size_t G = x.G, F = x.field_size();
  const NodeRateSpec& rates = model.node;
  const double f_max = rates.f_max;
  const double node_total = 2.0 * static_cast<double>(n) * static_cast<double>(G - 1) * f_max;
  const std::size_t K = options.subsample ? options.subsample : default_subsample(mu.size());

  std::vector<PsiEvaluator> psi;
  psi.reserve(n);
  for (std::size_t j = 0; j < n; ++j)
    psi.emplace_back(model, positions[j], y.sigma[j], mu, K, derive_seed(seed, "psi-subsample", {j}));

  result.interacting_paths.assign(n, {});
  result.decoupled_paths.assign(n, {});
  for (std::size_t j = 0; j < n; ++j) {
    result.interacting_paths[j] = {x.sigma[j], {}, T};
    result.decoupled_paths[j] = {y.sigma[j], {}, T};
  }

  CoupledEdges edges(model, x, y);
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  double node_firings = 0.0, edge_firings = 0.0;
  std::vector<double> gx(F), gy(F), gpsi(F);

  DiscrepancySeries& series = result.series;
  const auto sample = [&](double t) {
    double eta = 0.0, node_res = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      psi[j].advance(t);
      psi[j].field(gpsi);
      y.field(j, gy);
      x.field(j, gx);
      for (std::size_t i = 0; i < F; ++i) eta += std::abs(gy[i] - gpsi[i]);
      node_res += node_residual_intensity(rates, x.sigma[j], y.sigma[j], gx, gpsi);
    }
    series.times.push_back(t);
    series.delta.push_back(node_firings / static_cast<double>(n));
    series.phi.push_back(edge_firings / nn);
    series.eta.push_back(eta / static_cast<double>(n));
    series.node_residual.push_back(node_res / static_cast<double>(n));
    series.edge_residual.push_back(edges.residual_intensity());
  };

  const std::vector<double> grid = uniform_grid(T, options.grid_points);
  std::size_t next_grid = 0;
  const auto grid_until = [&](double t) {
    while (next_grid < grid.size() && grid[next_grid] < t) sample(grid[next_grid++]);
  };

  const auto log_event = [&](double t, EventKind kind, std::size_t j, std::size_t k, State from,
                             State to, Channel channel) {
    if (options.sim.record_log)
      result.log.events.push_back({t, kind, static_cast<std::uint32_t>(j),
                                   static_cast<std::uint32_t>(k), from, to, channel});
  };

  Rng rng(derive_seed(seed, "dynamics"));
  double t = 0.0;
  std::uint64_t events = 0;
  for (;;) {
    const double total = node_total + edges.total();
    t += total > 0.0 ? rng.exponential(total) : INFINITY;
    grid_until(t > T ? INFINITY : t);
    if (t > T) break;
    if (options.every_event) sample(t);
    if (rng.uniform() * total < node_total) {
      const std::size_t j = rng.index(n);
      const bool second = rng.uniform() < 0.5;
      const std::size_t r = rng.index(G - 1);
      if (second && y.sigma[j] == x.sigma[j]) {
        ++result.stats.rejected_proposals;
        continue;
      }
      const State alpha = second ? y.sigma[j] : x.sigma[j];
      const auto beta = static_cast<State>(r < alpha ? r : r + 1);
      double u = 0.0, w = 0.0;
      if (x.sigma[j] == alpha) {
        x.field(j, gx);
        u = rates.rate(alpha, beta, gx);
      }
      if (y.sigma[j] == alpha) {
        psi[j].advance(t);
        psi[j].field(gpsi);
        w = rates.rate(alpha, beta, gpsi);
      }
      if (u > f_max * (1.0 + 1e-12) || w > f_max * (1.0 + 1e-12))
        fail(ErrorCode::RateBoundViolated, "node rate exceeds the declared bound f_max");
      const double v = rng.uniform() * f_max;
      const bool move_x = v < u, move_y = v < w;
      if (!move_x && !move_y) {
        ++result.stats.rejected_proposals;
        continue;
      }
      const Channel channel = move_x && move_y ? Channel::Shared
                              : move_x         ? Channel::InteractingOnly
                                               : Channel::DecoupledOnly;
      if (move_x) {
        x.set_node(j, beta);
        push_path(result.interacting_paths, j, t, beta);
      }
      if (move_y) {
        psi[j].jump(beta);
        y.set_node(j, beta);
        push_path(result.decoupled_paths, j, t, beta);
      }
      edges.node_changed(x, y, j);
      if (channel != Channel::Shared) {
        node_firings += 1.0;
        ++result.residual_node_firings;
      }
      log_event(t, EventKind::Node, j, j, alpha, beta, channel);
      ++result.stats.node_events;
    } else {
      const auto pick = edges.sample(rng, x, y);
      const State from = pick.channel == Channel::DecoupledOnly ? y.edge(pick.j, pick.k)
                                                                : x.edge(pick.j, pick.k);
      if (pick.channel != Channel::DecoupledOnly) x.set_edge(pick.j, pick.k, pick.to);
      if (pick.channel != Channel::InteractingOnly) y.set_edge(pick.j, pick.k, pick.to);
      edges.edge_changed(x, y, pick.j, pick.k);
      if (pick.channel != Channel::Shared) {
        edge_firings += edges.weight(pick.j, pick.k);
        ++result.residual_edge_firings;
      }
      log_event(t, EventKind::Edge, pick.j, pick.k, from, pick.to, pick.channel);
      ++result.stats.edge_events;
    }
    if (++events >= options.sim.max_events)
      fail(ErrorCode::InvalidArgument, "event cap reached before the horizon");
    if (options.sim.audit_interval > 0 && events % options.sim.audit_interval == 0 &&
        (!x.counts_consistent() || !y.counts_consistent()))
      fail(ErrorCode::InvalidArgument, "maintained field tables drifted from a recount");
  }
  x.time = T;
  y.time = T;
  result.interacting = std::move(x);
  result.decoupled = std::move(y);
  return result;
}

}  // namespace adnet
