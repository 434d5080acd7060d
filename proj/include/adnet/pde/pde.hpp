#pragma once

// Deterministic pair-density system of the autonomous case. p_{theta eta}(alpha, a)
// is the limiting probability that an edge from a node at theta to a node at
// eta is in state a while the node at eta is in state alpha. Its generator
// depends on eta alone (through the field G_eta), so the density is stored as
// one (state x theta) panel per eta and advanced with a dense kernel.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "adnet/metrics/pair.hpp"
#include "adnet/model/model.hpp"

namespace adnet {

/// Which index of p the field integrates over. IntegrateSecond is
/// G_theta = sum_eta w_eta p_{theta eta}; IntegrateFirst swaps the roles.
enum class FieldConvention { IntegrateSecond, IntegrateFirst };

std::string_view to_string(FieldConvention c) noexcept;
FieldConvention parse_field_convention(std::string_view text);

struct PairDensityGrid {
  std::size_t Q = 0, G = 0, E = 0;
  double time = 0.0;
  std::vector<Position> nodes;
  std::vector<double> weights;
  std::vector<double> data;  // [(eta * S + alpha * E + a) * Q + theta], S = G E

  std::size_t states() const { return G * E; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t alpha, std::size_t a) const {
    return (j * states() + alpha * E + a) * Q + i;
  }
  /// p_{theta_i theta_j}(alpha, a).
  double at(std::size_t i, std::size_t j, std::size_t alpha, std::size_t a) const {
    return data[index(i, j, alpha, a)];
  }
  double& at(std::size_t i, std::size_t j, std::size_t alpha, std::size_t a) {
    return data[index(i, j, alpha, a)];
  }
  /// sum over (alpha, a) of p_{theta_i theta_j}.
  double mass(std::size_t i, std::size_t j) const;
};

struct FieldGrid {
  std::size_t Q = 0, G = 0, E = 0;
  double time = 0.0;
  std::vector<double> values;  // [j * F + a * G + alpha], the local-field layout

  std::span<const double> field(std::size_t j) const {
    return {values.data() + j * G * E, G * E};
  }
  double at(std::size_t j, std::size_t alpha, std::size_t a) const {
    return values[j * G * E + a * G + alpha];
  }
};

/// p_0(alpha, a) = sum_beta rho_theta(beta) rho_eta(alpha) kappa_{theta eta}(a | beta, alpha).
/// Throws NotAutonomous.
PairDensityGrid init_pair_density(const ValidatedModel& model);

FieldGrid field_from_density(const PairDensityGrid& grid,
                             FieldConvention convention = FieldConvention::IntegrateSecond);

/// Time derivative in the layout of grid.data. Throws NotAutonomous.
void pde_rhs(const ValidatedModel& model, const PairDensityGrid& grid, std::span<double> out,
             FieldConvention convention = FieldConvention::IntegrateSecond);
std::vector<double> pde_rhs(const ValidatedModel& model, const PairDensityGrid& grid,
                            FieldConvention convention = FieldConvention::IntegrateSecond);

struct PdeFrame {
  double time = 0.0;
  PairDensityGrid density;
  FieldGrid field;
};

struct PdeSolution {
  std::vector<PdeFrame> frames;
  double dt = 0.0;
  std::size_t steps = 0;
  double mass_drift = 0.0;   // max |mass(i, j) - initial mass(i, j)| over frames
  double min_entry = 0.0;    // smallest entry over frames before clamping
  FieldConvention convention = FieldConvention::IntegrateSecond;
};

/// Fixed-step classical RK4 from init_pair_density, landing exactly on each
/// requested output time (times in [0, T], nondecreasing; empty means {T}).
/// Throws StepTooLarge when dt (2 |G| f_max + 2 |E| l_max) >= 1.
PdeSolution integrate_pde(const ValidatedModel& model, double T, double dt,
                          std::span<const double> output_times,
                          FieldConvention convention = FieldConvention::IntegrateSecond);

struct RichardsonReport {
  double dt = 0.0;
  double diff_coarse = 0.0;  // max |p(dt) - p(dt/2)| at T
  double diff_fine = 0.0;    // max |p(dt/2) - p(dt/4)| at T
  double order = 0.0;        // log2(diff_coarse / diff_fine)
};

RichardsonReport richardson_order(const ValidatedModel& model, double T, double dt,
                                  FieldConvention convention = FieldConvention::IntegrateSecond);

/// nu(i, j, a, alpha) = w_i w_j p_{theta_i theta_j}(alpha, a), in the
/// pair-measure layout shared with the empirical measure.
PairTable nu_from_density(const PairDensityGrid& grid);

}  // namespace adnet
