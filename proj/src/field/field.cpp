#include "adnet/field/field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adnet/rng.hpp"

namespace adnet {
namespace {

constexpr double kHorizonSlack = 1e-12;

void matmul(std::span<const double> a, std::span<const double> b, std::size_t E,
            std::span<double> out) {
  for (std::size_t i = 0; i < E; ++i)
    for (std::size_t j = 0; j < E; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < E; ++k) acc += a[i * E + k] * b[k * E + j];
      out[i * E + j] = acc;
    }
}

void row_times(std::span<double> p, std::span<const double> m, std::size_t E,
               std::span<double> scratch) {
  for (std::size_t a = 0; a < E; ++a) {
    double acc = 0.0;
    for (std::size_t b = 0; b < E; ++b) acc += p[b] * m[b * E + a];
    scratch[a] = acc;
  }
  std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(E), p.begin());
}

bool covers(double horizon, double t) {
  return t <= horizon * (1.0 + kHorizonSlack) + kHorizonSlack;
}

}  // namespace

void edge_generator(const EdgeRateSpec& spec, State z, State y, std::span<double> q) {
  const std::size_t E = spec.edge_count;
  const std::size_t sj = spec.mode == EdgeMode::Autonomous ? 0 : z;
  for (std::size_t b = 0; b < E; ++b) {
    double exit = 0.0;
    for (std::size_t a = 0; a < E; ++a) {
      if (a == b) continue;
      const double r = spec.rate(b, a, sj, y);
      q[b * E + a] = r;
      exit += r;
    }
    q[b * E + b] = -exit;
  }
}

void generator_exp(std::span<const double> q, std::size_t E, double dt, std::span<double> out) {
  if (E == 2) {
    const double u = q[1], v = q[2], s = u + v;
    if (s == 0.0 || dt == 0.0) {
      out[0] = 1.0, out[1] = 0.0, out[2] = 0.0, out[3] = 1.0;
      return;
    }
    const double decay = -std::expm1(-s * dt);  // 1 - e^{-s dt}
    out[1] = u / s * decay;
    out[0] = 1.0 - out[1];
    out[2] = v / s * decay;
    out[3] = 1.0 - out[2];
    return;
  }
  double norm = 0.0;
  for (std::size_t i = 0; i < E; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < E; ++j) row += std::fabs(q[i * E + j]);
    norm = std::max(norm, row);
  }
  norm *= dt;
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const double scale = dt / std::ldexp(1.0, squarings);
  std::vector<double> a(E * E), term(E * E), tmp(E * E);
  for (std::size_t i = 0; i < E * E; ++i) a[i] = q[i] * scale;
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(E * E), 0.0);
  std::fill(term.begin(), term.end(), 0.0);
  for (std::size_t i = 0; i < E; ++i) out[i * E + i] = term[i * E + i] = 1.0;
  for (int k = 1; k <= 18; ++k) {
    matmul(term, a, E, tmp);
    for (std::size_t i = 0; i < E * E; ++i) {
      term[i] = tmp[i] / k;
      out[i] += term[i];
    }
  }
  for (int s = 0; s < squarings; ++s) {
    matmul(std::span<const double>(out.data(), E * E), std::span<const double>(out.data(), E * E), E, tmp);
    std::copy(tmp.begin(), tmp.end(), out.begin());
  }
}

void propagate_row(std::span<double> p, std::span<const double> q, std::size_t E, double dt) {
  if (dt <= 0.0) return;
  std::vector<double> m(E * E), scratch(E);
  generator_exp(q, E, dt, m);
  row_times(p, m, E, scratch);
}

std::vector<double> EdgeMarginal::at(double t) const {
  std::vector<double> out(edge_count);
  at(t, out);
  return out;
}

void EdgeMarginal::at(double t, std::span<double> out) const {
  if (pieces.empty()) fail(ErrorCode::PathDomainMismatch, "empty edge marginal");
  if (t < 0.0 || !covers(horizon, t))
    fail(ErrorCode::PathDomainMismatch, "edge marginal queried outside its horizon");
  auto it = std::upper_bound(pieces.begin(), pieces.end(), t,
                             [](double v, const EdgePiece& p) { return v < p.start; });
  const EdgePiece& piece = it == pieces.begin() ? pieces.front() : *std::prev(it);
  std::copy(piece.initial.begin(), piece.initial.end(), out.begin());
  propagate_row(out, piece.generator, edge_count, t - piece.start);
}

std::vector<double> EdgeMarginal::breakpoints() const {
  std::vector<double> out;
  for (const auto& p : pieces) out.push_back(p.start);
  out.push_back(horizon);
  return out;
}

EdgeMarginal propagate_edge_marginal(const ValidatedModel& model, const Position& theta,
                                     const Position& eta, const TrajectoryPath& z,
                                     const TrajectoryPath& y, double t) {
  if (t < 0.0 || !covers(z.horizon, t) || !covers(y.horizon, t))
    fail(ErrorCode::PathDomainMismatch, "node paths do not cover the requested interval");
  const std::size_t E = model.E();
  EdgeMarginal out;
  out.edge_count = E;
  out.horizon = t;
  std::vector<double> law(E);
  model.initial.kappa(model.domain, theta, eta, z.initial, y.initial, law);

  std::size_t iz = 0, iy = 0;
  State sz = z.initial, sy = y.initial;
  double start = 0.0;
  for (;;) {
    const double tz = iz < z.jumps.size() ? z.jumps[iz].time : INFINITY;
    const double ty = iy < y.jumps.size() ? y.jumps[iy].time : INFINITY;
    const double next = std::min({tz, ty, t});
    EdgePiece piece;
    piece.start = start;
    piece.end = next;
    piece.z = sz;
    piece.y = sy;
    piece.initial = law;
    piece.generator.resize(E * E);
    edge_generator(model.edge, sz, sy, piece.generator);
    propagate_row(law, piece.generator, E, next - start);
    out.pieces.push_back(std::move(piece));
    if (next >= t) break;
    if (tz == next) sz = z.jumps[iz++].state;
    if (ty == next) sy = y.jumps[iy++].state;
    start = next;
  }
  return out;
}

std::size_t default_subsample(std::size_t particles) {
  return particles <= 256 ? particles : 256;
}

PsiEvaluator::PsiEvaluator(const ValidatedModel& model, const Position& theta, State z0,
                           const MeasureSample& mu, std::size_t subsample, std::uint64_t seed)
    : model_(&model), mu_(&mu), E_(model.E()), G_(model.G()), z_(z0) {
  const std::size_t M = mu.size();
  if (M == 0) fail(ErrorCode::EmptyMeasure, "mean-field map needs a nonempty law");
  if (subsample == 0 || subsample >= M) {
    index_.resize(M);
    std::iota(index_.begin(), index_.end(), std::size_t{0});
  } else {
    std::vector<std::size_t> all(M);
    std::iota(all.begin(), all.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < subsample; ++i) {
      const std::size_t j = i + rng.index(M - i);
      std::swap(all[i], all[j]);
    }
    index_.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(subsample));
    std::sort(index_.begin(), index_.end());
  }
  const std::size_t K = index_.size();
  weight_.resize(K);
  double total = 0.0;
  for (std::size_t i = 0; i < K; ++i) total += weight_[i] = mu.particles[index_[i]].weight;
  if (!(total > 0.0)) fail(ErrorCode::EmptyMeasure, "law has zero total weight");
  for (double& w : weight_) w /= total;

  law_.resize(K * E_);
  cursor_.assign(K, 0);
  partner_.resize(K);
  for (std::size_t i = 0; i < K; ++i) {
    const Particle& p = mu.particles[index_[i]];
    partner_[i] = p.path.initial;
    model.initial.kappa(model.domain, theta, p.position, z0, p.path.initial,
                        std::span<double>(law_.data() + i * E_, E_));
  }
  generators_.resize(G_ * G_ * E_ * E_);
  for (std::size_t z = 0; z < G_; ++z)
    for (std::size_t y = 0; y < G_; ++y)
      edge_generator(model.edge, static_cast<State>(z), static_cast<State>(y),
                     std::span<double>(generators_.data() + (z * G_ + y) * E_ * E_, E_ * E_));
  transition_.resize(G_ * E_ * E_);
  scratch_.resize(E_);
}

void PsiEvaluator::advance(double t) {
  if (t < time_) fail(ErrorCode::InvalidArgument, "mean-field evaluator cannot move backwards");
  if (t == time_) return;
  if (!covers(mu_->horizon, t))
    fail(ErrorCode::LawHorizonTooShort, "limit law does not cover the requested time");
  const double dt = t - time_;
  const std::size_t EE = E_ * E_;
  for (std::size_t y = 0; y < G_; ++y)
    generator_exp(std::span<const double>(generators_.data() + (z_ * G_ + y) * EE, EE), E_, dt,
                  std::span<double>(transition_.data() + y * EE, EE));
  std::vector<double> step(EE);
  for (std::size_t i = 0; i < index_.size(); ++i) {
    const auto& jumps = mu_->particles[index_[i]].path.jumps;
    std::span<double> p(law_.data() + i * E_, E_);
    std::size_t& c = cursor_[i];
    if (c < jumps.size() && jumps[c].time <= t) {
      double s = time_;
      while (c < jumps.size() && jumps[c].time <= t) {
        const double jt = jumps[c].time;
        if (jt > s) {
          generator_exp(std::span<const double>(generators_.data() + (z_ * G_ + partner_[i]) * EE, EE),
                        E_, jt - s, step);
          row_times(p, step, E_, scratch_);
          s = jt;
        }
        partner_[i] = jumps[c].state;
        ++c;
      }
      if (t > s) {
        generator_exp(std::span<const double>(generators_.data() + (z_ * G_ + partner_[i]) * EE, EE),
                      E_, t - s, step);
        row_times(p, step, E_, scratch_);
      }
    } else {
      row_times(p, std::span<const double>(transition_.data() + partner_[i] * EE, EE), E_, scratch_);
    }
  }
  time_ = t;
}

void PsiEvaluator::field(std::span<double> out) const {
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(E_ * G_), 0.0);
  for (std::size_t i = 0; i < index_.size(); ++i) {
    const double w = weight_[i];
    const std::size_t y = partner_[i];
    for (std::size_t a = 0; a < E_; ++a) out[a * G_ + y] += w * law_[i * E_ + a];
  }
}

FieldPath mean_field_psi(const ValidatedModel& model, const Position& theta,
                         const TrajectoryPath& z, const MeasureSample& mu,
                         std::span<const double> grid, std::size_t subsample,
                         std::uint64_t seed) {
  if (mu.particles.empty()) fail(ErrorCode::EmptyMeasure, "mean-field map needs a nonempty law");
  FieldPath out;
  out.field_size = model.states.field_size();
  out.times.assign(grid.begin(), grid.end());
  out.values.resize(grid.size() * out.field_size);
  PsiEvaluator eval(model, theta, z.initial, mu, subsample, seed);
  out.subsample = eval.used();
  out.full = eval.used() == mu.size();
  std::size_t next_jump = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double t = grid[g];
    if (!covers(z.horizon, t)) fail(ErrorCode::PathDomainMismatch, "path does not cover the grid");
    while (next_jump < z.jumps.size() && z.jumps[next_jump].time <= t) {
      eval.advance(z.jumps[next_jump].time);
      eval.jump(z.jumps[next_jump].state);
      ++next_jump;
    }
    eval.advance(t);
    eval.field(std::span<double>(out.values.data() + g * out.field_size, out.field_size));
  }
  return out;
}

LipschitzGap lipschitz_gap(const ValidatedModel& model, const Position& theta,
                           const Position& eta, const TrajectoryPath& z, const TrajectoryPath& y,
                           const TrajectoryPath& z2, const TrajectoryPath& y2, double t) {
  LipschitzGap gap;
  gap.input_gap = path_distance(z, z2, t) + path_distance(y, y2, t);
  const EdgeMarginal a = propagate_edge_marginal(model, theta, eta, z, y, t);
  const EdgeMarginal b = propagate_edge_marginal(model, theta, eta, z2, y2, t);
  const std::size_t E = model.E();
  std::vector<double> pa(E), pb(E);
  const auto diff = [&](double s) {
    a.at(s, pa);
    b.at(s, pb);
    double worst = 0.0;
    for (std::size_t i = 0; i < E; ++i) worst = std::max(worst, std::fabs(pa[i] - pb[i]));
    return worst;
  };
  std::vector<double> breaks = a.breakpoints();
  const auto more = b.breakpoints();
  breaks.insert(breaks.end(), more.begin(), more.end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  constexpr int kSamples = 8;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double lo = breaks[k], hi = breaks[k + 1];
    if (hi <= lo) continue;
    double best = -1.0;
    int best_i = 0;
    for (int i = 0; i <= kSamples; ++i) {
      const double v = diff(lo + (hi - lo) * i / kSamples);
      if (v > best) {
        best = v;
        best_i = i;
      }
    }
    gap.output_gap = std::max(gap.output_gap, best);
    // Golden-section refinement around the best sample.
    double l = lo + (hi - lo) * std::max(0, best_i - 1) / kSamples;
    double r = lo + (hi - lo) * std::min(kSamples, best_i + 1) / kSamples;
    constexpr double g = 0.6180339887498949;
    for (int it = 0; it < 40 && r - l > 1e-12; ++it) {
      const double m1 = r - g * (r - l), m2 = l + g * (r - l);
      if (diff(m1) < diff(m2)) l = m1; else r = m2;
    }
    gap.output_gap = std::max(gap.output_gap, diff(0.5 * (l + r)));
  }
  return gap;
}

double certified_lipschitz_constant(const ValidatedModel& model, double t) {
  const double k = 2.0 * model.edge.l_max * static_cast<double>(model.E());
  return k * std::exp(k * t);
}

}  // namespace adnet
