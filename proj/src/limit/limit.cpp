#include "adnet/limit/limit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adnet/error.hpp"
#include "adnet/field/field.hpp"
#include "adnet/parallel.hpp"

namespace adnet {

State sample_initial_z(const ValidatedModel& model, const Position& theta, Rng& rng) {
  std::vector<double> rho(model.G());
  model.initial.rho(model.domain, theta, rho);
  return static_cast<State>(rng.categorical(rho));
}

State sample_initial_z(const ValidatedModel& model, const Position& theta, std::uint64_t seed) {
  Rng rng(seed);
  return sample_initial_z(model, theta, rng);
}

std::vector<Particle> stratified_particles(const SpatialDomain& domain, std::size_t M) {
  const std::size_t Q = domain.size();
  if (Q == 0 || M < Q)
    fail(ErrorCode::InvalidArgument,
         "stratified law needs at least one particle per quadrature node (M >= " +
             std::to_string(Q) + ")");
  std::vector<Particle> particles;
  particles.reserve(M);
  const std::size_t base = M / Q, extra = M % Q;
  for (std::size_t q = 0; q < Q; ++q) {
    const std::size_t m = base + (q < extra ? 1 : 0);
    for (std::size_t r = 0; r < m; ++r) {
      Particle p;
      p.position = domain.nodes[q];
      p.weight = domain.weights[q] / static_cast<double>(m);
      particles.push_back(std::move(p));
    }
  }
  return particles;
}

MeasureSample frozen_initial_law(const ValidatedModel& model, std::size_t M, double T,
                                 std::uint64_t seed) {
  MeasureSample mu;
  mu.particles = stratified_particles(model.domain, M);
  mu.horizon = T;
  mu.generation = 0;
  mu.seed = seed;
  for (std::size_t i = 0; i < M; ++i) {
    Particle& p = mu.particles[i];
    p.path.initial = sample_initial_z(model, p.position, derive_seed(seed, "z0", {i}));
    p.path.horizon = T;
  }
  return mu;
}

MeasureSample extend_horizon(const MeasureSample& mu, double T) {
  if (T < mu.horizon) fail(ErrorCode::InvalidArgument, "cannot shorten a law by extension");
  MeasureSample out = mu;
  out.horizon = T;
  for (Particle& p : out.particles) p.path.horizon = T;
  return out;
}

MeasureSample picard_step(const ValidatedModel& model, const MeasureSample& mu_prev,
                          std::size_t M, std::uint64_t seed, const PicardOptions& options) {
  return picard_step(model, mu_prev, M, mu_prev.horizon, seed, options);
}

MeasureSample picard_step(const ValidatedModel& model, const MeasureSample& mu_prev,
                          std::size_t M, double horizon, std::uint64_t seed,
                          const PicardOptions& options) {
  if (mu_prev.particles.empty()) fail(ErrorCode::EmptyMeasure, "Picard step needs a prior law");
  if (mu_prev.horizon < horizon * (1.0 - 1e-12))
    fail(ErrorCode::LawHorizonTooShort, "prior law does not cover the requested horizon");
  MeasureSample out;
  out.particles = stratified_particles(model.domain, M);
  out.horizon = horizon;
  out.generation = mu_prev.generation + 1;
  out.seed = seed;
  const std::size_t G = model.G(), F = model.states.field_size();
  const double f_max = model.node.f_max;
  const double bound = static_cast<double>(G - 1) * f_max;

  parallel_for(M, options.threads, [&](std::size_t i) {
    Particle& p = out.particles[i];
    const State z0 = sample_initial_z(model, p.position, derive_seed(seed, "z0", {i}));
    p.path.initial = z0;
    p.path.horizon = horizon;
    if (!(bound > 0.0)) return;
    // The proposal stream never depends on the state, so iterates driven by
    // one seed differ only through acceptance decisions.
    Rng rng(derive_seed(seed, "particle", {i}));
    PsiEvaluator psi(model, p.position, z0, mu_prev, options.subsample,
                     derive_seed(seed, "psi-subsample", {i}));
    std::vector<double> g(F);
    State z = z0;
    double t = 0.0;
    for (;;) {
      t += rng.exponential(bound);
      if (t > horizon) break;
      const std::size_t r = rng.index(G - 1);
      const double u = rng.uniform();
      const auto beta = static_cast<State>(r < z ? r : r + 1);
      psi.advance(t);
      psi.field(g);
      const double f = model.node.rate(z, beta, g);
      if (f > f_max * (1.0 + 1e-12))
        fail(ErrorCode::RateBoundViolated, "node rate exceeds the declared bound f_max");
      if (u * f_max < f) {
        z = beta;
        psi.jump(z);
        p.path.push(t, z);
      }
    }
  });
  return out;
}

double contraction_constant(const ValidatedModel& model) {
  return static_cast<double>(model.G() - 1) * model.node.lip_f *
         (1.0 + model.edge.l_max * static_cast<double>(model.E()));
}

double auto_window(const ValidatedModel& model, double T) {
  const double C = contraction_constant(model);
  return C > 0.0 ? std::min(T, 1.0 / (2.0 * C)) : T;
}

SolveResult solve_limit_law(const ValidatedModel& model, double T, const SolveOptions& options) {
  if (!(T > 0.0)) fail(ErrorCode::InvalidArgument, "limit horizon must be positive");
  if (options.max_iters == 0) fail(ErrorCode::InvalidArgument, "max_iters must be positive");
  const double window = options.window > 0.0 ? std::min(options.window, T) : auto_window(model, T);
  const std::size_t M = options.particles;
  const auto windows = static_cast<std::size_t>(std::max(1.0, std::ceil(T / window - 1e-9)));

  SolveResult result;
  FixedPointReport& report = result.report;
  report.window = window;
  report.contraction_constant = contraction_constant(model);
  MeasureSample current = frozen_initial_law(model, M, std::min(window, T), options.seed);

  for (std::size_t w = 1; w <= windows; ++w) {
    const double end = w == windows ? T : static_cast<double>(w) * window;
    current = extend_horizon(current, end);
    WindowReport wr;
    wr.end = end;
    for (std::size_t it = 1; it <= options.max_iters; ++it) {
      MeasureSample next = picard_step(model, current, M, end, options.seed, options.picard);
      const double d = wasserstein(model.domain, next, current, end);
      if (!wr.distances.empty() && wr.distances.back() > 0.0) {
        wr.ratios.push_back(d / wr.distances.back());
        wr.max_ratio = std::max(wr.max_ratio, wr.ratios.back());
      }
      wr.distances.push_back(d);
      report.distances.push_back(d);
      ++report.iterations;
      current = std::move(next);
      if (it >= options.min_iters && d < options.tol) {
        wr.converged = true;
        break;
      }
    }
    report.windows.push_back(wr);
    if (!wr.converged) {
      fail(ErrorCode::NoConvergence,
           "Picard iteration did not reach tol on window ending at " + std::to_string(end) +
               " after " + std::to_string(options.max_iters) + " iterations (last distance " +
               std::to_string(wr.distances.back()) + ", max ratio " +
               std::to_string(wr.max_ratio) + ")");
    }
  }
  report.converged = true;
  if (options.compute_residual)
    report.residual = self_consistency_residual(model, current, M, options.seed, options.picard);
  result.law = std::move(current);
  return result;
}

double self_consistency_residual(const ValidatedModel& model, const MeasureSample& mu,
                                 std::size_t M, std::uint64_t seed,
                                 const PicardOptions& options) {
  const MeasureSample next = picard_step(model, mu, M, mu.horizon, seed, options);
  return wasserstein(model.domain, next, mu, mu.horizon);
}

}  // namespace adnet
