#pragma once

// Monte-Carlo Picard iteration for the limit law of the general system: a
// particle law is frozen, each particle re-simulated against the mean field
// it induces, and the map iterated over growing time windows until successive
// iterates agree in the transport distance.

#include <cstdint>
#include <vector>

#include "adnet/metrics/measure.hpp"
#include "adnet/model/model.hpp"
#include "adnet/rng.hpp"

namespace adnet {

/// Initial state of a limit particle at theta: alpha with probability
/// rho_theta(alpha).
State sample_initial_z(const ValidatedModel& model, const Position& theta, Rng& rng);
State sample_initial_z(const ValidatedModel& model, const Position& theta, std::uint64_t seed);

/// Stratified positions: quadrature node q receives floor(M / Q) particles,
/// plus one for the first M mod Q nodes, each of weight w_q / m_q.
/// Throws InvalidArgument when M < Q.
std::vector<Particle> stratified_particles(const SpatialDomain& domain, std::size_t M);

/// Initial iterate: stratified particles with initial states drawn by
/// sample_initial_z and no jumps on [0, T].
MeasureSample frozen_initial_law(const ValidatedModel& model, std::size_t M, double T,
                                 std::uint64_t seed);

/// Same law with every path continued without jumps up to T >= horizon.
MeasureSample extend_horizon(const MeasureSample& mu, double T);

struct PicardOptions {
  std::size_t subsample = 0;  // partners per mean-field evaluation; 0 uses all
  unsigned threads = 1;
};

/// One application of the fixed-point map on [0, mu_prev.horizon]. Particle i
/// draws its initial state and its proposal stream from seeds derived from
/// (seed, i) only, so repeated calls with one seed share random numbers.
/// Throws LawHorizonTooShort when mu_prev ends before the horizon requested.
MeasureSample picard_step(const ValidatedModel& model, const MeasureSample& mu_prev,
                          std::size_t M, std::uint64_t seed, const PicardOptions& options = {});
MeasureSample picard_step(const ValidatedModel& model, const MeasureSample& mu_prev,
                          std::size_t M, double horizon, std::uint64_t seed,
                          const PicardOptions& options = {});

struct WindowReport {
  double end = 0.0;
  std::vector<double> distances;  // successive-iterate distances
  std::vector<double> ratios;     // distances[i + 1] / distances[i] where defined
  double max_ratio = 0.0;
  bool converged = false;
};

struct FixedPointReport {
  double window = 0.0;
  double contraction_constant = 0.0;
  std::vector<double> distances;  // all windows, in order
  std::vector<WindowReport> windows;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

struct SolveOptions {
  std::size_t particles = 1024;
  double window = 0.0;  // 0 selects auto_window
  double tol = 0.02;
  std::size_t max_iters = 30;
  std::size_t min_iters = 2;  // per window, so a contraction ratio exists
  std::uint64_t seed = 0;
  PicardOptions picard;
  bool compute_residual = true;
};

/// Heuristic Lipschitz constant of the fixed-point map per unit time:
/// (|G| - 1) lip_f (1 + l_max |E|).
double contraction_constant(const ValidatedModel& model);

/// min(T, 1 / (2 C)) with C = contraction_constant (T when C = 0).
double auto_window(const ValidatedModel& model, double T);

struct SolveResult {
  MeasureSample law;
  FixedPointReport report;
};

/// Windowed Picard iteration on [0, T]. Throws NoConvergence when a window
/// does not reach tol within max_iters.
SolveResult solve_limit_law(const ValidatedModel& model, double T, const SolveOptions& options);

/// d_W(picard_step(mu), mu) at the horizon of mu.
double self_consistency_residual(const ValidatedModel& model, const MeasureSample& mu,
                                 std::size_t M, std::uint64_t seed,
                                 const PicardOptions& options = {});

}  // namespace adnet
