#include <doctest.h>

#include <cmath>
#include <map>

#include "adnet/rng.hpp"
#include "adnet/sim/network.hpp"
#include "models.hpp"
#include "sim/engine.hpp"

using namespace adnet;

namespace {

/// Total exit intensity of every edge, by a direct loop over pairs.
std::map<std::pair<std::size_t, std::size_t>, double> brute_rates(const ValidatedModel& m,
                                                                  const NetworkState& s) {
  std::map<std::pair<std::size_t, std::size_t>, double> out;
  for (std::size_t j = 0; j < s.n; ++j)
    for (std::size_t k = 0; k < s.n; ++k) {
      if (j == k && !s.include_self_edges) continue;
      if (s.symmetric && k < j) continue;
      double r = 0.0;
      for (std::size_t a = 0; a < s.E; ++a)
        if (a != s.edge(j, k)) r += eval_edge_rate(m.edge, s.edge(j, k), a, s.sigma[j], s.sigma[k]);
      out[{j, k}] = r;
    }
  return out;
}

void check_engine(const std::string& text, bool self) {
  const ValidatedModel m = testmodels::from_text(text);
  const std::size_t n = 6;
  const auto pos = m.domain.default_positions(n);
  NetworkState s = sample_initial_network(m, n, pos, 3, self);
  detail::EdgeEngine engine(m, s);
  Rng rng(4);
  // Scramble through the update paths the simulator uses.
  for (int i = 0; i < 300; ++i) {
    if (rng.uniform() < 0.3) {
      const std::size_t k = rng.index(n);
      s.set_node(k, static_cast<State>(1 - s.sigma[k]));
      engine.node_changed(s, k);
    } else {
      const auto p = engine.sample(rng);
      s.set_edge(p.j, p.k, p.to);
      engine.edge_changed(s, p.j, p.k);
    }
  }
  const auto rates = brute_rates(m, s);
  double total = 0.0;
  for (const auto& [key, r] : rates) total += r;
  CHECK(engine.total() == doctest::Approx(total).epsilon(1e-12));
  const std::size_t draws = 200000;
  std::map<std::pair<std::size_t, std::size_t>, double> hits;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto p = engine.sample(rng);
    CHECK(p.from == s.edge(p.j, p.k));
    CHECK(p.to != p.from);
    hits[{p.j, p.k}] += 1.0;
  }
  for (const auto& [key, r] : rates) {
    const double expect = r / total;
    const double se = std::sqrt(expect * (1.0 - expect) / draws);
    CHECK(std::abs(hits[key] / draws - expect) < 4.5 * se + 1e-12);
  }
}

}  // namespace

TEST_CASE("edge engine draws edges in proportion to their exit rates") {
  check_engine(testmodels::general(), false);
  check_engine(testmodels::general(), true);
  check_engine(testmodels::general(8, 1.0, 1.2, "symmetric"), false);
  check_engine(testmodels::autonomous(), false);
}
