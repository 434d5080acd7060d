#include "adnet/sim/simulate.hpp"

#include <chrono>

#include "engine.hpp"
#include "recorder.hpp"

namespace adnet {

std::vector<double> uniform_grid(double T, std::size_t points) {
  std::vector<double> grid;
  if (points == 0) return grid;
  if (points == 1) return {T};
  grid.resize(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = T * static_cast<double>(i) / static_cast<double>(points - 1);
  grid.back() = T;
  return grid;
}

SimResult simulate_network_from(const ValidatedModel& model, const NetworkState& initial,
                                double T, std::uint64_t seed, const SimOptions& options) {
  detail::check_common(model, initial.n, T);
  SimResult result;
  result.initial = initial;
  result.initial.time = 0.0;
  NetworkState s = result.initial;
  const std::size_t n = s.n, G = s.G;
  const NodeRateSpec& rates = model.node;
  const double f_max = rates.f_max;
  const double node_total = static_cast<double>(n) * static_cast<double>(G - 1) * f_max;

  Rng rng(derive_seed(seed, "dynamics"));
  detail::EdgeEngine edges(model, s);
  detail::Recorder rec{&options, &result.node_paths, &result.edge_paths, &result.log,
                       &result.snapshots, {}, 0};
  rec.start(s, T);
  std::vector<double> g(s.field_size());

  double t = 0.0;
  std::uint64_t events = 0;
  for (;;) {
    const double total = node_total + edges.total();
    if (!(total > 0.0)) break;
    t += rng.exponential(total);
    rec.snapshots_before(s, t, T);
    if (t > T) break;
    if (rng.uniform() * total < node_total) {
      const std::size_t j = rng.index(n);
      const std::size_t r = rng.index(G - 1);
      const State alpha = s.sigma[j];
      const auto beta = static_cast<State>(r < alpha ? r : r + 1);
      s.field(j, g);
      const double f = rates.rate(alpha, beta, g);
      detail::check_bound(f, f_max);
      if (rng.uniform() * f_max < f) {
        const auto t0 = options.time_node_events ? std::chrono::steady_clock::now()
                                                 : std::chrono::steady_clock::time_point{};
        s.set_node(j, beta);
        edges.node_changed(s, j);
        if (options.time_node_events)
          result.stats.node_event_seconds +=
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.node(t, j, alpha, beta);
        ++result.stats.node_events;
      } else {
        ++result.stats.rejected_proposals;
      }
    } else {
      const auto pick = edges.sample(rng);
      s.set_edge(pick.j, pick.k, pick.to);
      edges.edge_changed(s, pick.j, pick.k);
      rec.edge(s, t, pick.j, pick.k, pick.from, pick.to);
      ++result.stats.edge_events;
    }
    s.time = t;
    ++events;
    if (options.audit_interval > 0 && events % options.audit_interval == 0 &&
        !s.counts_consistent())
      fail(ErrorCode::InvalidArgument, "maintained field tables drifted from a recount");
    if (events >= options.max_events)
      fail(ErrorCode::InvalidArgument, "event cap reached before the horizon");
  }
  rec.snapshots_before(s, INFINITY, T);
  s.time = T;
  result.final = std::move(s);
  return result;
}

SimResult simulate_network(const ValidatedModel& model, std::size_t n,
                           std::span<const Position> positions, double T, std::uint64_t seed,
                           const SimOptions& options) {
  detail::check_common(model, n, T);
  const NetworkState initial =
      sample_initial_network(model, n, positions, seed, options.include_self_edges);
  return simulate_network_from(model, initial, T, seed, options);
}

DecoupledResult simulate_decoupled(const ValidatedModel& model, std::size_t n,
                                   std::span<const Position> positions, double T,
                                   const MeasureSample& mu, std::uint64_t seed,
                                   const DecoupledOptions& options) {
  detail::check_common(model, n, T);
  if (mu.particles.empty()) fail(ErrorCode::EmptyMeasure, "decoupled system needs a limit law");
  if (mu.horizon < T * (1.0 - 1e-12))
    fail(ErrorCode::LawHorizonTooShort, "limit law does not cover the simulation horizon");
  DecoupledResult result;
  result.initial = sample_initial_network(model, n, positions, seed, options.sim.include_self_edges);
  NetworkState s = result.initial;
  const std::size_t G = s.G, F = s.field_size();
  const NodeRateSpec& rates = model.node;
  const double f_max = rates.f_max;
  const double node_total = static_cast<double>(n) * static_cast<double>(G - 1) * f_max;
  const std::size_t K = options.subsample ? options.subsample : default_subsample(mu.size());

  std::vector<PsiEvaluator> psi;
  psi.reserve(n);
  for (std::size_t j = 0; j < n; ++j)
    psi.emplace_back(model, positions[j], s.sigma[j], mu, K, derive_seed(seed, "psi-subsample", {j}));

  result.grid = uniform_grid(T, options.grid_points);
  if (options.record_fields) {
    result.fields.resize(n);
    for (auto& f : result.fields) {
      f.field_size = F;
      f.times = result.grid;
      f.values.assign(result.grid.size() * F, 0.0);
      f.subsample = psi.front().used();
      f.full = psi.front().used() == mu.size();
    }
  }
  std::size_t next_grid = 0;
  const auto grid_until = [&](double t) {
    while (next_grid < result.grid.size() && result.grid[next_grid] < t) {
      if (options.record_fields) {
        for (std::size_t j = 0; j < n; ++j) {
          psi[j].advance(result.grid[next_grid]);
          psi[j].field(std::span<double>(result.fields[j].values.data() + next_grid * F, F));
        }
      }
      ++next_grid;
    }
  };

  Rng rng(derive_seed(seed, "dynamics"));
  detail::EdgeEngine edges(model, s);
  detail::Recorder rec{&options.sim, &result.node_paths, &result.edge_paths, &result.log,
                       &result.snapshots, {}, 0};
  rec.start(s, T);
  std::vector<double> g(F);
  double t = 0.0;
  std::uint64_t events = 0;
  for (;;) {
    const double total = node_total + edges.total();
    const double dt = total > 0.0 ? rng.exponential(total) : INFINITY;
    t += dt;
    grid_until(t > T ? INFINITY : t);
    rec.snapshots_before(s, t, T);
    if (t > T) break;
    if (rng.uniform() * total < node_total) {
      const std::size_t j = rng.index(n);
      const std::size_t r = rng.index(G - 1);
      const State alpha = s.sigma[j];
      const auto beta = static_cast<State>(r < alpha ? r : r + 1);
      psi[j].advance(t);
      psi[j].field(g);
      const double f = rates.rate(alpha, beta, g);
      detail::check_bound(f, f_max);
      if (rng.uniform() * f_max < f) {
        psi[j].jump(beta);
        s.set_node(j, beta);
        edges.node_changed(s, j);
        rec.node(t, j, alpha, beta);
        ++result.stats.node_events;
      } else {
        ++result.stats.rejected_proposals;
      }
    } else {
      const auto pick = edges.sample(rng);
      s.set_edge(pick.j, pick.k, pick.to);
      edges.edge_changed(s, pick.j, pick.k);
      rec.edge(s, t, pick.j, pick.k, pick.from, pick.to);
      ++result.stats.edge_events;
    }
    s.time = t;
    if (++events >= options.sim.max_events)
      fail(ErrorCode::InvalidArgument, "event cap reached before the horizon");
  }
  rec.snapshots_before(s, INFINITY, T);
  s.time = T;
  result.final = std::move(s);
  return result;
}

}  // namespace adnet
