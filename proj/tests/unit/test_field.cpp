#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "adnet/field/field.hpp"
#include "adnet/rng.hpp"
#include "models.hpp"
#include "oracles.hpp"

using namespace adnet;

namespace {

std::vector<double> random_generator(Rng& rng, std::size_t E, double scale) {
  std::vector<double> q(E * E, 0.0);
  for (std::size_t b = 0; b < E; ++b)
    for (std::size_t a = 0; a < E; ++a)
      if (a != b) {
        q[b * E + a] = scale * rng.uniform();
        q[b * E + b] -= q[b * E + a];
      }
  return q;
}

TrajectoryPath random_path(Rng& rng, double T, double rate) {
  TrajectoryPath p{static_cast<State>(rng.index(2)), {}, T};
  double t = 0.0;
  for (;;) {
    t += rng.exponential(rate);
    if (t > T) break;
    p.push(t, static_cast<State>(1 - p.at(t)));
  }
  return p;
}

/// Edge law at t by stepping exactly between the jump times of z and y with
/// uniformized matrix exponentials of a generator built from eval_edge_rate.
std::vector<double> oracle_edge_law(const ValidatedModel& m, const Position& theta,
                                    const Position& eta, const TrajectoryPath& z,
                                    const TrajectoryPath& y, double t) {
  const std::size_t E = m.E();
  std::vector<double> p(E);
  m.initial.kappa(m.domain, theta, eta, z.initial, y.initial, p);
  std::vector<double> cuts{0.0};
  for (const auto& j : z.jumps) if (j.time < t) cuts.push_back(j.time);
  for (const auto& j : y.jumps) if (j.time < t) cuts.push_back(j.time);
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(t);
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double lo = cuts[c], hi = cuts[c + 1];
    if (hi <= lo) continue;
    const State zs = z.at(lo), ys = y.at(lo);
    oracle::Matrix q(E * E, 0.0);
    for (std::size_t b = 0; b < E; ++b)
      for (std::size_t a = 0; a < E; ++a)
        if (a != b) {
          q[b * E + a] = eval_edge_rate(m.edge, b, a, zs, ys);
          q[b * E + b] -= q[b * E + a];
        }
    p = oracle::row_times(p, oracle::expm_uniformized(q, E, hi - lo), E);
  }
  return p;
}

}  // namespace

TEST_CASE("two-state generator exponential matches the closed form") {
  for (double u : {0.0, 0.3, 2.0})
    for (double d : {0.0, 0.7, 5.0})
      for (double t : {0.0, 0.01, 1.0, 4.0}) {
        const std::vector<double> q{-u, u, d, -d};
        std::vector<double> out(4);
        generator_exp(q, 2, t, out);
        CHECK(out[1] == doctest::Approx(oracle::two_state_p1(0.0, u, d, t)).epsilon(1e-10));
        CHECK(out[3] == doctest::Approx(oracle::two_state_p1(1.0, u, d, t)).epsilon(1e-10));
        CHECK(out[0] + out[1] == doctest::Approx(1.0).epsilon(1e-14));
      }
}

TEST_CASE("generator exponential matches uniformization for larger alphabets") {
  Rng rng(31);
  for (std::size_t E : {3u, 4u, 6u})
    for (int trial = 0; trial < 20; ++trial) {
      const auto q = random_generator(rng, E, trial % 2 ? 5.0 : 0.5);
      const double t = 0.05 + 2.0 * rng.uniform();
      std::vector<double> out(E * E);
      generator_exp(q, E, t, out);
      const auto ref = oracle::expm_uniformized(q, E, t);
      for (std::size_t i = 0; i < E * E; ++i) CHECK(std::abs(out[i] - ref[i]) < 1e-10);
    }
}

TEST_CASE("propagation has the flow property and preserves the simplex") {
  Rng rng(32);
  const std::size_t E = 4;
  const auto q = random_generator(rng, E, 2.0);
  std::vector<double> p{0.1, 0.2, 0.3, 0.4}, r = p;
  propagate_row(p, q, E, 0.7);
  propagate_row(r, q, E, 0.3);
  propagate_row(r, q, E, 0.4);
  double sum = 0.0;
  for (std::size_t i = 0; i < E; ++i) {
    CHECK(p[i] == doctest::Approx(r[i]).epsilon(1e-12));
    CHECK(p[i] >= 0.0);
    sum += p[i];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("edge generator rows sum to zero") {
  const ValidatedModel m = testmodels::from_text(testmodels::general());
  std::vector<double> q(4);
  for (State z = 0; z < 2; ++z)
    for (State y = 0; y < 2; ++y) {
      edge_generator(m.edge, z, y, q);
      CHECK(q[0] + q[1] == doctest::Approx(0.0));
      CHECK(q[2] + q[3] == doctest::Approx(0.0));
      CHECK(q[1] == eval_edge_rate(m.edge, 0, 1, z, y));
    }
}

TEST_CASE("edge marginal along frozen paths matches piecewise exponentials") {
  const ValidatedModel m = testmodels::from_text(testmodels::general());
  Rng rng(33);
  const Position theta{0.125, 0}, eta{0.625, 0};
  for (int trial = 0; trial < 20; ++trial) {
    const auto z = random_path(rng, 1.0, 4.0), y = random_path(rng, 1.0, 4.0);
    const EdgeMarginal em = propagate_edge_marginal(m, theta, eta, z, y, 1.0);
    for (double t : {0.0, 0.2, 0.55, 1.0}) {
      const auto got = em.at(t);
      const auto ref = oracle_edge_law(m, theta, eta, z, y, t);
      for (std::size_t a = 0; a < 2; ++a) CHECK(got[a] == doctest::Approx(ref[a]).epsilon(1e-10));
    }
    const auto bp = em.breakpoints();
    CHECK(bp.front() == 0.0);
    CHECK(bp.back() == 1.0);
  }
  const TrajectoryPath short_path{0, {}, 0.5};
  try {
    propagate_edge_marginal(m, theta, eta, short_path, short_path, 0.8);
    FAIL("short path accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PathDomainMismatch);
  }
}

TEST_CASE("mean-field map matches a weighted sum of oracle edge laws") {
  const ValidatedModel m = testmodels::from_text(testmodels::general());
  Rng rng(34);
  MeasureSample mu;
  mu.horizon = 1.0;
  for (int i = 0; i < 12; ++i)
    mu.particles.push_back({m.domain.nodes[rng.index(m.domain.size())], random_path(rng, 1.0, 3.0),
                            1.0 / 12.0});
  const Position theta{0.375, 0};
  const auto z = random_path(rng, 1.0, 3.0);
  const std::vector<double> grid{0.0, 0.1, 0.33, 0.8, 1.0};
  const FieldPath fp = mean_field_psi(m, theta, z, mu, grid);
  CHECK(fp.full);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> ref(4, 0.0);
    for (const auto& p : mu.particles) {
      const auto law = oracle_edge_law(m, theta, p.position, z, p.path, grid[g]);
      for (std::size_t a = 0; a < 2; ++a) ref[a * 2 + p.path.at(grid[g])] += p.weight * law[a];
    }
    const auto got = fp.at_index(g);
    for (std::size_t i = 0; i < 4; ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-10));
  }
  // Empty law and a law ending before the grid are rejected.
  try {
    mean_field_psi(m, theta, z, MeasureSample{{}, 1.0}, grid);
    FAIL("empty law accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyMeasure);
  }
}

TEST_CASE("subsampled mean-field map is deterministic and renormalized") {
  const ValidatedModel m = testmodels::from_text(testmodels::general());
  Rng rng(35);
  MeasureSample mu;
  mu.horizon = 1.0;
  for (int i = 0; i < 50; ++i)
    mu.particles.push_back({m.domain.nodes[rng.index(m.domain.size())], random_path(rng, 1.0, 3.0),
                            1.0 / 50.0});
  const auto z = random_path(rng, 1.0, 3.0);
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const FieldPath a = mean_field_psi(m, {0.0, 0}, z, mu, grid, 10, 99);
  const FieldPath b = mean_field_psi(m, {0.0, 0}, z, mu, grid, 10, 99);
  CHECK(a.values == b.values);
  CHECK(!a.full);
  CHECK(a.subsample == 10);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double s = 0.0;
    for (double v : a.at_index(g)) s += v;
    CHECK(s == doctest::Approx(1.0));
  }
  CHECK(default_subsample(100) == 100);
  CHECK(default_subsample(5000) == 256);
}

TEST_CASE("field-independent edges give a field independent of the node path") {
  // Autonomous edges depend only on the presynaptic state; with a constant
  // presynaptic path the edge law is the same for every z.
  const ValidatedModel m = testmodels::from_text(testmodels::autonomous());
  Rng rng(36);
  const TrajectoryPath y{1, {}, 2.0};
  const Position theta{0.0, 0}, eta{0.5, 0};
  const auto base = propagate_edge_marginal(m, theta, eta, TrajectoryPath{0, {}, 2.0}, y, 2.0).at(2.0);
  for (int trial = 0; trial < 5; ++trial) {
    TrajectoryPath z = random_path(rng, 2.0, 3.0);
    z.initial = 0;
    z.jumps.clear();
    z.push(0.5 + rng.uniform(), 1);
    const auto got = propagate_edge_marginal(m, theta, eta, z, y, 2.0).at(2.0);
    for (std::size_t a = 0; a < 2; ++a) CHECK(got[a] == doctest::Approx(base[a]).epsilon(1e-12));
  }
}

TEST_CASE("Lipschitz ratio stays below the certified constant") {
  const ValidatedModel m = testmodels::from_text(testmodels::general());
  Rng rng(37);
  const double t = 1.0;
  const double C = certified_lipschitz_constant(m, t);
  CHECK(C == doctest::Approx(2.0 * m.edge.l_max * 2.0 * std::exp(2.0 * m.edge.l_max * 2.0 * t)));
  int informative = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto z = random_path(rng, t, 3.0), y = random_path(rng, t, 3.0);
    auto z2 = random_path(rng, t, 3.0), y2 = random_path(rng, t, 3.0);
    z2.initial = z.initial;
    y2.initial = y.initial;
    // Re-derive the alternating jump states after changing the initial state.
    for (auto* p : {&z2, &y2}) {
      State s = p->initial;
      for (auto& j : p->jumps) j.state = s = static_cast<State>(1 - s);
    }
    const LipschitzGap gap = lipschitz_gap(m, {0.0, 0}, {0.5, 0}, z, y, z2, y2, t);
    if (gap.input_gap > 0.0) {
      ++informative;
      CHECK(gap.output_gap <= C * gap.input_gap + 1e-12);
    } else {
      CHECK(gap.output_gap == doctest::Approx(0.0));
    }
  }
  CHECK(informative > 50);
  // Identical paths.
  const auto z = random_path(rng, t, 3.0);
  const LipschitzGap same = lipschitz_gap(m, {0.0, 0}, {0.5, 0}, z, z, z, z, t);
  CHECK(same.output_gap == 0.0);
  CHECK(same.input_gap == 0.0);
}

TEST_CASE("propagation is linear in the initial vector") {
  Rng rng(38);
  for (std::size_t E : {2u, 3u, 5u}) {
    const auto q = random_generator(rng, E, 2.0);
    std::vector<double> p1(E), p2(E);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t a = 0; a < E; ++a) s1 += p1[a] = rng.uniform(), s2 += p2[a] = rng.uniform();
    for (std::size_t a = 0; a < E; ++a) p1[a] /= s1, p2[a] /= s2;
    const double w = rng.uniform();
    std::vector<double> mix(E);
    for (std::size_t a = 0; a < E; ++a) mix[a] = w * p1[a] + (1.0 - w) * p2[a];
    propagate_row(p1, q, E, 0.7);
    propagate_row(p2, q, E, 0.7);
    propagate_row(mix, q, E, 0.7);
    for (std::size_t a = 0; a < E; ++a)
      CHECK(std::abs(mix[a] - (w * p1[a] + (1.0 - w) * p2[a])) < 1e-12);
  }
}

TEST_CASE("subsampled mean-field map is unbiased for uniform weights") {
  const ValidatedModel m = testmodels::from_text(testmodels::general());
  Rng rng(39);
  MeasureSample mu;
  mu.horizon = 1.0;
  constexpr int kParticles = 40;
  for (int i = 0; i < kParticles; ++i)
    mu.particles.push_back({m.domain.nodes[rng.index(m.domain.size())], random_path(rng, 1.0, 3.0),
                            1.0 / kParticles});
  const auto z = random_path(rng, 1.0, 3.0);
  const std::vector<double> grid{0.25, 0.5, 1.0};
  const FieldPath full = mean_field_psi(m, {0.0, 0}, z, mu, grid);
  CHECK(full.full);
  constexpr int kDraws = 1000;
  std::vector<double> sum(full.values.size(), 0.0), sq(full.values.size(), 0.0);
  for (int d = 0; d < kDraws; ++d) {
    const FieldPath sub = mean_field_psi(m, {0.0, 0}, z, mu, grid, 8, 1000 + d);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += sub.values[i], sq[i] += sub.values[i] * sub.values[i];
  }
  for (std::size_t i = 0; i < sum.size(); ++i) {
    const double mean = sum[i] / kDraws;
    const double var = std::max(0.0, sq[i] / kDraws - mean * mean);
    const double se = std::sqrt(var / kDraws);
    CHECK(std::abs(mean - full.values[i]) <= 3.0 * se + 1e-12);
  }
}
