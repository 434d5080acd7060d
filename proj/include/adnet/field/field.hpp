#pragma once

// Edge-state law along a pair of frozen node paths (a linear master equation
// with piecewise-constant generator) and the mean-field map that averages it
// over a particle law to produce a node's limiting local field.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adnet/metrics/measure.hpp"
#include "adnet/model/model.hpp"

namespace adnet {

/// Q[b * E + a] = l_{b->a}(z, y) off the diagonal, Q[b * E + b] = -exit rate.
void edge_generator(const EdgeRateSpec& spec, State z, State y, std::span<double> q);

/// exp(Q dt) for an E x E generator (row-major). Closed form for E = 2,
/// scaling and squaring of a Taylor polynomial otherwise.
void generator_exp(std::span<const double> q, std::size_t E, double dt, std::span<double> out);

/// p <- p exp(Q dt) for a row vector p.
void propagate_row(std::span<double> p, std::span<const double> q, std::size_t E, double dt);

struct EdgePiece {
  double start = 0.0;
  double end = 0.0;
  State z = 0;
  State y = 0;
  std::vector<double> initial;    // law at `start`
  std::vector<double> generator;  // E x E
};

/// Piecewise description of the edge law on [0, horizon]; pieces split at the
/// union of the jump times of the two node paths.
struct EdgeMarginal {
  std::size_t edge_count = 0;
  double horizon = 0.0;
  std::vector<EdgePiece> pieces;

  std::vector<double> at(double t) const;
  void at(double t, std::span<double> out) const;
  /// Piece boundaries, including 0 and the horizon.
  std::vector<double> breakpoints() const;
};

/// Initial edge law kappa_{theta eta}(. | z_0, y_0) propagated along (z, y)
/// up to t. Throws PathDomainMismatch when a path does not cover [0, t].
EdgeMarginal propagate_edge_marginal(const ValidatedModel& model, const Position& theta,
                                     const Position& eta, const TrajectoryPath& z,
                                     const TrajectoryPath& y, double t);

struct FieldPath {
  std::size_t field_size = 0;
  std::vector<double> times;
  std::vector<double> values;  // [time][a * G + sigma]
  std::size_t subsample = 0;   // particles used per evaluation
  bool full = true;            // false when a subsample estimator was used

  std::span<const double> at_index(std::size_t i) const {
    return {values.data() + i * field_size, field_size};
  }
};

/// Default subsample size: every particle up to 256, else 256.
std::size_t default_subsample(std::size_t particles);

/// Incremental evaluator of psi_{theta, t}(z, mu) for a path z revealed in
/// time order. Each particle's edge law is advanced only over the new time
/// interval. With a subsample, the chosen particles are fixed at
/// construction and weights are renormalized over them.
class PsiEvaluator {
 public:
  PsiEvaluator(const ValidatedModel& model, const Position& theta, State z0,
               const MeasureSample& mu, std::size_t subsample, std::uint64_t seed);

  double time() const { return time_; }
  State state() const { return z_; }
  /// Advances every edge law to t >= time(). Throws LawHorizonTooShort.
  void advance(double t);
  /// Records a jump of z at the current time.
  void jump(State z) { z_ = z; }
  /// Field at the current time, layout [a * G + sigma].
  void field(std::span<double> out) const;
  std::size_t used() const { return index_.size(); }

 private:
  const ValidatedModel* model_;
  const MeasureSample* mu_;
  std::size_t E_, G_;
  State z_;
  double time_ = 0.0;
  std::vector<std::size_t> index_;
  std::vector<double> weight_;
  std::vector<double> law_;          // [particle][a]
  std::vector<std::size_t> cursor_;  // next jump of the partner path
  std::vector<State> partner_;
  std::vector<double> generators_;   // [(z * G + y) * E * E]
  std::vector<double> transition_;   // scratch, per (z, y) pair
  std::vector<double> scratch_;
};

/// psi_{theta, t}(z, mu) on the output grid (nondecreasing times). With
/// subsample == 0 every particle is used.
FieldPath mean_field_psi(const ValidatedModel& model, const Position& theta,
                         const TrajectoryPath& z, const MeasureSample& mu,
                         std::span<const double> grid, std::size_t subsample = 0,
                         std::uint64_t seed = 0);

struct LipschitzGap {
  double output_gap = 0.0;  // sup over [0, t] and a of |Psi(z, y) - Psi(z~, y~)|
  double input_gap = 0.0;   // d_t(z, z~) + d_t(y, y~)
};

LipschitzGap lipschitz_gap(const ValidatedModel& model, const Position& theta,
                           const Position& eta, const TrajectoryPath& z, const TrajectoryPath& y,
                           const TrajectoryPath& z2, const TrajectoryPath& y2, double t);

/// 2 l_max |E| exp(2 l_max |E| t): bounds output_gap / input_gap for paths with
/// equal initial states.
double certified_lipschitz_constant(const ValidatedModel& model, double t);

}  // namespace adnet
