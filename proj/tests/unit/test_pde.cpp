#include <doctest.h>

#include <cmath>

#include "adnet/pde/pde.hpp"
#include "adnet/rng.hpp"
#include "models.hpp"
#include "oracles.hpp"

using namespace adnet;

namespace {

/// Field of column eta integrated over the second index, by direct loops.
std::vector<double> oracle_field(const PairDensityGrid& p, std::size_t eta) {
  std::vector<double> g(p.G * p.E, 0.0);
  for (std::size_t zeta = 0; zeta < p.Q; ++zeta)
    for (std::size_t alpha = 0; alpha < p.G; ++alpha)
      for (std::size_t a = 0; a < p.E; ++a) g[a * p.G + alpha] += p.weights[zeta] * p.at(eta, zeta, alpha, a);
  return g;
}

/// Master-equation right-hand side written out transition by transition.
std::vector<double> oracle_rhs(const ValidatedModel& m, const PairDensityGrid& p) {
  std::vector<double> out(p.data.size(), 0.0);
  const std::size_t G = p.G, E = p.E;
  for (std::size_t i = 0; i < p.Q; ++i)
    for (std::size_t j = 0; j < p.Q; ++j) {
      const auto g = oracle_field(p, j);
      for (std::size_t alpha = 0; alpha < G; ++alpha)
        for (std::size_t a = 0; a < E; ++a) {
          double d = 0.0;
          for (std::size_t beta = 0; beta < G; ++beta) {
            if (beta == alpha) continue;
            d += p.at(i, j, beta, a) * eval_node_rate(m.node, beta, alpha, g);
            d -= p.at(i, j, alpha, a) * eval_node_rate(m.node, alpha, beta, g);
          }
          for (std::size_t b = 0; b < E; ++b) {
            if (b == a) continue;
            d += p.at(i, j, alpha, b) * eval_edge_rate(m.edge, b, a, 0, alpha);
            d -= p.at(i, j, alpha, a) * eval_edge_rate(m.edge, a, b, 0, alpha);
          }
          out[p.index(i, j, alpha, a)] = d;
        }
    }
  return out;
}

std::string field_free_autonomous(double u, double d, double l01, double l10, int Q,
                                  double x01 = 0.2, double x10 = 0.1) {
  return "[states]\nnode = 2\nedge = 2\n"
         "[domain]\nkind = \"torus\"\nquadrature = " + std::to_string(Q) + "\n"
         "[node_rates]\nfamily = \"table\"\n"
         "[[node_rates.transition]]\nfrom = 0\nto = 1\nbias = " + std::to_string(u) + "\n"
         "[[node_rates.transition]]\nfrom = 1\nto = 0\nbias = " + std::to_string(d) + "\n"
         "[edge_rates]\nmode = \"autonomous\"\n"
         "[[edge_rates.transition]]\nfrom = 0\nto = 1\npresynaptic = [" + std::to_string(l01) + ", " + std::to_string(x01) + "]\n"
         "[[edge_rates.transition]]\nfrom = 1\nto = 0\npresynaptic = [" + std::to_string(x10) + ", " + std::to_string(l10) + "]\n"
         "[initial]\nnode_base = [0.6, 0.4]\nnode_modulation = [-0.25, 0.25]\n"
         "edge_near = [[0.7, 0.3], [0.4, 0.6]]\n"
         "[horizon]\nT = 2.0\n";
}

}  // namespace

TEST_CASE("initial pair density matches a brute-force sum") {
  const ValidatedModel m = testmodels::from_text(testmodels::autonomous(6));
  const PairDensityGrid p = init_pair_density(m);
  CHECK(p.Q == 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      for (std::size_t alpha = 0; alpha < 2; ++alpha)
        for (std::size_t a = 0; a < 2; ++a) {
          double ref = 0.0;
          std::vector<double> k(2);
          for (std::size_t beta = 0; beta < 2; ++beta) {
            m.initial.kappa(m.domain, p.nodes[i], p.nodes[j], beta, alpha, k);
            ref += m.initial.rho(m.domain, p.nodes[i], beta) * m.initial.rho(m.domain, p.nodes[j], alpha) * k[a];
          }
          CHECK(std::abs(p.at(i, j, alpha, a) - ref) < 1e-14);
        }
      CHECK(p.mass(i, j) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("field from density under both conventions") {
  const ValidatedModel m = testmodels::from_text(testmodels::autonomous(2));
  PairDensityGrid p = init_pair_density(m);
  Rng rng(3);
  for (double& x : p.data) x = rng.uniform();
  const FieldGrid second = field_from_density(p, FieldConvention::IntegrateSecond);
  const FieldGrid first = field_from_density(p, FieldConvention::IntegrateFirst);
  for (std::size_t j = 0; j < 2; ++j) {
    const auto ref = oracle_field(p, j);
    for (std::size_t i = 0; i < 4; ++i) CHECK(second.field(j)[i] == doctest::Approx(ref[i]));
    for (std::size_t alpha = 0; alpha < 2; ++alpha)
      for (std::size_t a = 0; a < 2; ++a) {
        const double hand = 0.5 * p.at(0, j, alpha, a) + 0.5 * p.at(1, j, alpha, a);
        CHECK(first.at(j, alpha, a) == doctest::Approx(hand));
      }
  }
  CHECK(parse_field_convention("integrate-first") == FieldConvention::IntegrateFirst);
  CHECK(to_string(FieldConvention::IntegrateSecond) == "integrate-second");
  CHECK_THROWS_AS(parse_field_convention("sideways"), Error);
}

TEST_CASE("right-hand side matches the written-out master equation") {
  const ValidatedModel m = testmodels::from_text(testmodels::autonomous(5));
  PairDensityGrid p = init_pair_density(m);
  Rng rng(4);
  for (double& x : p.data) x *= 0.5 + rng.uniform();
  const auto got = pde_rhs(m, p);
  const auto ref = oracle_rhs(m, p);
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(got[i] - ref[i]) < 1e-12);
  // Each (theta, eta) block conserves mass.
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0.0;
      for (std::size_t alpha = 0; alpha < 2; ++alpha)
        for (std::size_t a = 0; a < 2; ++a) s += got[p.index(i, j, alpha, a)];
      CHECK(std::abs(s) < 1e-13);
    }
}

TEST_CASE("zero rates leave the density fixed") {
  const ValidatedModel m = testmodels::from_text(field_free_autonomous(0.0, 0.0, 0.0, 0.0, 4, 0.0, 0.0));
  const PairDensityGrid p = init_pair_density(m);
  for (double v : pde_rhs(m, p)) CHECK(v == 0.0);
  const std::vector<double> times{1.0};
  const PdeSolution s = integrate_pde(m, 1.0, 0.1, times);
  CHECK(s.frames.back().density.data == p.data);
}

TEST_CASE("field-free density evolves by a matrix exponential") {
  const double u = 0.8, d = 0.5, l01 = 0.6, l10 = 0.9;
  const ValidatedModel m = testmodels::from_text(field_free_autonomous(u, d, l01, l10, 4));
  const PairDensityGrid p0 = init_pair_density(m);
  const std::vector<double> times{0.5, 2.0};
  const PdeSolution s = integrate_pde(m, 2.0, 0.01, times);
  REQUIRE(s.frames.size() == 2);
  // Generator on (alpha, a) pairs: node moves with constant rates, edges with
  // rates depending on the eta node's state alpha.
  oracle::Matrix q(16, 0.0);
  const auto idx = [](std::size_t alpha, std::size_t a) { return alpha * 2 + a; };
  for (std::size_t alpha = 0; alpha < 2; ++alpha)
    for (std::size_t a = 0; a < 2; ++a) {
      const std::size_t from = idx(alpha, a);
      const double node = alpha == 0 ? u : d;
      q[from * 4 + idx(1 - alpha, a)] += node;
      const double edge = eval_edge_rate(m.edge, a, 1 - a, 0, alpha);
      q[from * 4 + idx(alpha, 1 - a)] += edge;
      q[from * 4 + from] -= node + edge;
    }
  for (const PdeFrame& f : s.frames) {
    CHECK(f.time == doctest::Approx(f.time == 0.5 ? 0.5 : 2.0));
    const auto e = oracle::expm_uniformized(q, 4, f.time);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        std::vector<double> v(4);
        for (std::size_t alpha = 0; alpha < 2; ++alpha)
          for (std::size_t a = 0; a < 2; ++a) v[idx(alpha, a)] = p0.at(i, j, alpha, a);
        const auto ref = oracle::row_times(v, e, 4);
        for (std::size_t alpha = 0; alpha < 2; ++alpha)
          for (std::size_t a = 0; a < 2; ++a)
            CHECK(std::abs(f.density.at(i, j, alpha, a) - ref[idx(alpha, a)]) < 1e-8);
      }
  }
  CHECK(s.mass_drift < 1e-12);
}

TEST_CASE("RK4 converges at fourth order on the autonomous toy") {
  const ValidatedModel m = testmodels::from_text(testmodels::autonomous(8));
  const RichardsonReport r = richardson_order(m, 2.0, 0.1);
  CHECK(r.diff_coarse > r.diff_fine);
  CHECK(std::abs(r.order - 4.0) < 0.3);
  const std::vector<double> times{0.3, 2.0};
  const PdeSolution s = integrate_pde(m, 2.0, 0.05, times);
  CHECK(s.mass_drift < 1e-8);
  CHECK(s.min_entry > -1e-12);
  CHECK(s.frames.front().time == 0.3);
  CHECK(s.frames.back().time == 2.0);
}

TEST_CASE("pair measure from the density") {
  const ValidatedModel m = testmodels::from_text(testmodels::autonomous(4));
  const PairDensityGrid p = init_pair_density(m);
  const PairTable nu = nu_from_density(p);
  CHECK(nu.total() == doctest::Approx(1.0));
  CHECK(nu.at(1, 2, 1, 0) == doctest::Approx(p.weights[1] * p.weights[2] * p.at(1, 2, 0, 1)));
}

TEST_CASE("pair-density errors") {
  const ValidatedModel general = testmodels::from_text(testmodels::general());
  try {
    init_pair_density(general);
    FAIL("endpoint-dependent edges accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotAutonomous);
  }
  const ValidatedModel m = testmodels::from_text(testmodels::autonomous(4));
  const std::vector<double> times{1.0};
  try {
    integrate_pde(m, 1.0, 1.0, times);
    FAIL("oversized step accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StepTooLarge);
  }
}
