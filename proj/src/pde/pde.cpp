#include "adnet/pde/pde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adnet/error.hpp"
#include "adnet/kernels/kernels.hpp"

namespace adnet {
namespace {

void require_autonomous(const ValidatedModel& model) {
  if (model.edge.mode != EdgeMode::Autonomous)
    fail(ErrorCode::NotAutonomous, "pair-density system needs autonomous edge rates");
}

/// Transposed S x S generator for column eta: gen[s'][s] = rate s -> s'
/// (diagonal: minus the exit rate of s'), so out = gen * panel.
void build_generator(const ValidatedModel& model, std::span<const double> field,
                     std::span<double> gen) {
  const std::size_t G = model.G(), E = model.E(), S = G * E;
  std::fill(gen.begin(), gen.end(), 0.0);
  const auto add = [&](std::size_t from, std::size_t to, double r) {
    if (r == 0.0) return;
    gen[to * S + from] += r;
    gen[from * S + from] -= r;
  };
  for (std::size_t zeta = 0; zeta < G; ++zeta)
    for (std::size_t alpha = 0; alpha < G; ++alpha) {
      if (alpha == zeta) continue;
      const double f = model.node.rate(zeta, alpha, field);
      for (std::size_t a = 0; a < E; ++a) add(zeta * E + a, alpha * E + a, f);
    }
  for (std::size_t alpha = 0; alpha < G; ++alpha)
    for (std::size_t b = 0; b < E; ++b)
      for (std::size_t a = 0; a < E; ++a)
        if (a != b) add(alpha * E + b, alpha * E + a, model.edge.rate(b, a, 0, alpha));
}

void fill_field(const PairDensityGrid& grid, FieldConvention convention, std::span<double> out) {
  const std::size_t Q = grid.Q, G = grid.G, E = grid.E, S = grid.states();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t t = 0; t < Q; ++t)
    for (std::size_t alpha = 0; alpha < G; ++alpha)
      for (std::size_t a = 0; a < E; ++a) {
        const std::size_t s = alpha * E + a;
        double acc = 0.0;
        if (convention == FieldConvention::IntegrateSecond) {
          for (std::size_t eta = 0; eta < Q; ++eta)
            acc += grid.weights[eta] * grid.data[(eta * S + s) * Q + t];
        } else {
          acc = kernels::dot(std::span<const double>(grid.data.data() + (t * S + s) * Q, Q),
                             grid.weights);
        }
        out[t * S + a * G + alpha] = acc;
      }
}

/// out = rhs(p) for a raw data array sharing grid's shape.
void rhs_raw(const ValidatedModel& model, PairDensityGrid& scratch, std::span<const double> p,
             std::span<double> out, FieldConvention convention, std::vector<double>& field,
             std::vector<double>& gen) {
  const std::size_t Q = scratch.Q, S = scratch.states();
  std::copy(p.begin(), p.end(), scratch.data.begin());
  fill_field(scratch, convention, field);
  for (std::size_t eta = 0; eta < Q; ++eta) {
    build_generator(model, std::span<const double>(field.data() + eta * S, S), gen);
    kernels::generator_panel(gen, S, p.subspan(eta * S * Q, S * Q), out.subspan(eta * S * Q, S * Q),
                             Q);
  }
}

}  // namespace

std::string_view to_string(FieldConvention c) noexcept {
  return c == FieldConvention::IntegrateSecond ? "integrate-second" : "integrate-first";
}

FieldConvention parse_field_convention(std::string_view text) {
  if (text == "integrate-second") return FieldConvention::IntegrateSecond;
  if (text == "integrate-first") return FieldConvention::IntegrateFirst;
  fail(ErrorCode::InvalidArgument, "unknown field convention '" + std::string(text) + "'");
}

double PairDensityGrid::mass(std::size_t i, std::size_t j) const {
  double s = 0.0;
  for (std::size_t alpha = 0; alpha < G; ++alpha)
    for (std::size_t a = 0; a < E; ++a) s += at(i, j, alpha, a);
  return s;
}

PairDensityGrid init_pair_density(const ValidatedModel& model) {
  require_autonomous(model);
  PairDensityGrid grid;
  grid.Q = model.domain.size();
  grid.G = model.G();
  grid.E = model.E();
  grid.nodes = model.domain.nodes;
  grid.weights = model.domain.weights;
  grid.data.assign(grid.Q * grid.Q * grid.states(), 0.0);
  const std::size_t Q = grid.Q, G = grid.G, E = grid.E;
  std::vector<double> rho(Q * G), kappa(E);
  for (std::size_t q = 0; q < Q; ++q)
    model.initial.rho(model.domain, grid.nodes[q], std::span<double>(rho.data() + q * G, G));
  for (std::size_t i = 0; i < Q; ++i)
    for (std::size_t j = 0; j < Q; ++j)
      for (std::size_t beta = 0; beta < G; ++beta)
        for (std::size_t alpha = 0; alpha < G; ++alpha) {
          const double v = rho[i * G + beta] * rho[j * G + alpha];
          if (v == 0.0) continue;
          model.initial.kappa(model.domain, grid.nodes[i], grid.nodes[j], beta, alpha, kappa);
          for (std::size_t a = 0; a < E; ++a) grid.at(i, j, alpha, a) += v * kappa[a];
        }
  return grid;
}

FieldGrid field_from_density(const PairDensityGrid& grid, FieldConvention convention) {
  FieldGrid out;
  out.Q = grid.Q;
  out.G = grid.G;
  out.E = grid.E;
  out.time = grid.time;
  out.values.resize(grid.Q * grid.states());
  fill_field(grid, convention, out.values);
  return out;
}

void pde_rhs(const ValidatedModel& model, const PairDensityGrid& grid, std::span<double> out,
             FieldConvention convention) {
  require_autonomous(model);
  if (out.size() != grid.data.size())
    fail(ErrorCode::LengthMismatch, "derivative buffer does not match the grid");
  PairDensityGrid scratch = grid;
  std::vector<double> field(grid.Q * grid.states()), gen(grid.states() * grid.states());
  rhs_raw(model, scratch, grid.data, out, convention, field, gen);
}

std::vector<double> pde_rhs(const ValidatedModel& model, const PairDensityGrid& grid,
                            FieldConvention convention) {
  std::vector<double> out(grid.data.size());
  pde_rhs(model, grid, out, convention);
  return out;
}

PdeSolution integrate_pde(const ValidatedModel& model, double T, double dt,
                          std::span<const double> output_times, FieldConvention convention) {
  require_autonomous(model);
  if (!(T > 0.0)) fail(ErrorCode::InvalidArgument, "integration horizon must be positive");
  if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "step must be positive");
  const double speed = 2.0 * static_cast<double>(model.G()) * model.node.f_max +
                       2.0 * static_cast<double>(model.E()) * model.edge.l_max;
  if (dt * speed >= 1.0)
    fail(ErrorCode::StepTooLarge, "step violates dt (2 |G| f_max + 2 |E| l_max) < 1");
  std::vector<double> times(output_times.begin(), output_times.end());
  if (times.empty()) times.push_back(T);
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] < 0.0 || times[i] > T * (1.0 + 1e-12) || (i > 0 && times[i] < times[i - 1]))
      fail(ErrorCode::InvalidArgument, "output times must be nondecreasing within [0, T]");

  PdeSolution sol;
  sol.dt = dt;
  sol.convention = convention;
  PairDensityGrid grid = init_pair_density(model);
  const std::size_t N = grid.data.size(), Q = grid.Q, S = grid.states();
  std::vector<double> mass0(Q * Q);
  for (std::size_t i = 0; i < Q; ++i)
    for (std::size_t j = 0; j < Q; ++j) mass0[i * Q + j] = grid.mass(i, j);
  sol.min_entry = *std::min_element(grid.data.begin(), grid.data.end());

  PairDensityGrid scratch = grid;
  std::vector<double> field(Q * S), gen(S * S);
  std::vector<double> k1(N), k2(N), k3(N), k4(N), stage(N);
  const auto step = [&](double h) {
    std::span<const double> y = grid.data;
    rhs_raw(model, scratch, y, k1, convention, field, gen);
    kernels::lincomb(stage, y, 0.5 * h, k1);
    rhs_raw(model, scratch, stage, k2, convention, field, gen);
    kernels::lincomb(stage, y, 0.5 * h, k2);
    rhs_raw(model, scratch, stage, k3, convention, field, gen);
    kernels::lincomb(stage, y, h, k3);
    rhs_raw(model, scratch, stage, k4, convention, field, gen);
    kernels::rk4_finish(grid.data, h, k1, k2, k3, k4);
  };

  double t = 0.0;
  for (double target : times) {
    const double span = target - t;
    if (span > 0.0) {
      const auto steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
      const double h = span / static_cast<double>(steps);
      for (std::size_t s = 0; s < steps; ++s) step(h);
      sol.steps += steps;
      t = target;
    }
    grid.time = target;
    for (std::size_t i = 0; i < Q; ++i)
      for (std::size_t j = 0; j < Q; ++j)
        sol.mass_drift = std::max(sol.mass_drift, std::abs(grid.mass(i, j) - mass0[i * Q + j]));
    sol.min_entry = std::min(sol.min_entry, *std::min_element(grid.data.begin(), grid.data.end()));
    PdeFrame frame;
    frame.time = target;
    frame.density = grid;
    // Roundoff negatives are clamped only in the emitted copy.
    for (double& v : frame.density.data) v = std::max(v, 0.0);
    frame.field = field_from_density(frame.density, convention);
    sol.frames.push_back(std::move(frame));
  }
  return sol;
}

RichardsonReport richardson_order(const ValidatedModel& model, double T, double dt,
                                  FieldConvention convention) {
  const double out[] = {T};
  const auto run = [&](double h) {
    return integrate_pde(model, T, h, out, convention).frames.back().density.data;
  };
  const auto a = run(dt), b = run(dt / 2.0), c = run(dt / 4.0);
  RichardsonReport r;
  r.dt = dt;
  for (std::size_t i = 0; i < a.size(); ++i) {
    r.diff_coarse = std::max(r.diff_coarse, std::abs(a[i] - b[i]));
    r.diff_fine = std::max(r.diff_fine, std::abs(b[i] - c[i]));
  }
  r.order = r.diff_fine > 0.0 ? std::log2(r.diff_coarse / r.diff_fine) : 0.0;
  return r;
}

PairTable nu_from_density(const PairDensityGrid& grid) {
  PairTable nu(grid.Q, grid.G, grid.E);
  for (std::size_t i = 0; i < grid.Q; ++i)
    for (std::size_t j = 0; j < grid.Q; ++j)
      for (std::size_t a = 0; a < grid.E; ++a)
        for (std::size_t alpha = 0; alpha < grid.G; ++alpha)
          nu.at(i, j, a, alpha) = grid.weights[i] * grid.weights[j] * grid.at(i, j, alpha, a);
  return nu;
}

}  // namespace adnet
