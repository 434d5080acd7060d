#include <doctest.h>

#include <cmath>

#include "adnet/rng.hpp"
#include "models.hpp"

using namespace adnet;
using nlohmann::json;

namespace {

ErrorCode first_violation(const json& doc) {
  const ValidationReport r = validate_model(doc);
  REQUIRE_FALSE(r.ok());
  return r.violations.front().code;
}

ErrorCode thrown_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an adnet::Error");
  return ErrorCode::IoError;
}

json toy_doc() { return parse_model_text(testmodels::autonomous()); }

}  // namespace

TEST_CASE("model text parser handles tables, arrays of tables and nested arrays") {
  const json doc = parse_model_text(
      "# comment\nname = \"x\" # trailing\nflag = true\n[a]\nv = [[1, 2],\n  [3, 4.5e-1]]\n"
      "[[a.list]]\nk = -1\n[[a.list]]\nk = 2\n");
  CHECK(doc["name"] == "x");
  CHECK(doc["flag"] == true);
  CHECK(doc["a"]["v"][1][1].get<double>() == doctest::Approx(0.45));
  CHECK(doc["a"]["list"].size() == 2);
  CHECK(doc["a"]["list"][1]["k"] == 2);
}

TEST_CASE("model text parser reports errors with line numbers") {
  try {
    parse_model_text("[a]\nx = 1\nx = 2\n");
    FAIL("duplicate key accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
  CHECK(thrown_code([] { parse_model_text("x = [1, 2\n"); }) == ErrorCode::ParseError);
  CHECK(thrown_code([] { parse_model_text("x = \"open\n"); }) == ErrorCode::ParseError);
  CHECK(thrown_code([] { parse_model_text("[a\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("shipped models validate") {
  for (const char* name : {"autonomous_toy", "general_toy", "field_free", "symmetric_points"}) {
    CAPTURE(name);
    const ValidatedModel m = load_model(std::string(ADNET_SOURCE_DIR) + "/models/" + name + ".toml");
    CHECK(m.G() >= 2);
    CHECK(m.node.f_max > 0.0);
  }
}

TEST_CASE("structural errors throw UnknownKey and ParseError") {
  json doc = toy_doc();
  doc["domain"]["colour"] = 1;
  CHECK(thrown_code([&] { validate_model(doc); }) == ErrorCode::UnknownKey);
  doc = toy_doc();
  doc["initial"]["edge_near"] = json::array({1.0, 2.0, 3.0});
  CHECK(thrown_code([&] { validate_model(doc); }) == ErrorCode::ParseError);
  doc = toy_doc();
  doc.erase("states");
  CHECK(thrown_code([&] { validate_model(doc); }) == ErrorCode::ParseError);
}

TEST_CASE("invariant violations are reported with their codes") {
  json doc = toy_doc();
  doc["edge_rates"]["transition"][0]["presynaptic"] = json::array({-0.2, 1.0});
  CHECK(first_violation(doc) == ErrorCode::NegativeRate);

  doc = toy_doc();
  doc["node_rates"]["transition"][0]["to"] = 0;
  CHECK(first_violation(doc) == ErrorCode::SameState);

  doc = toy_doc();
  doc["edge_rates"]["transition"][0].erase("presynaptic");
  doc["edge_rates"]["transition"][0]["rates"] = json::array({json::array({0.2, 1.0}), json::array({0.3, 1.0})});
  CHECK(first_violation(doc) == ErrorCode::InconsistentAutonomousTable);

  doc = toy_doc();
  doc["initial"]["node_base"] = json::array({0.6, 0.5});
  CHECK(first_violation(doc) == ErrorCode::UnnormalizedKernel);

  doc = toy_doc();
  doc["initial"]["edge_near"] = json::array({json::array({0.7, 0.4}), json::array({0.4, 0.6})});
  CHECK(first_violation(doc) == ErrorCode::UnnormalizedKernel);

  doc = toy_doc();
  doc["initial"]["node_modulation"] = json::array({-0.7, 0.7});
  CHECK(first_violation(doc) == ErrorCode::UnnormalizedKernel);

  json pts = load_model_document(std::string(ADNET_SOURCE_DIR) + "/models/symmetric_points.toml");
  pts["domain"]["weights"] = json::array({0.5, 0.3, 0.3});
  CHECK(first_violation(pts) == ErrorCode::BadQuadrature);
  pts = load_model_document(std::string(ADNET_SOURCE_DIR) + "/models/symmetric_points.toml");
  pts["domain"]["distances"] = json::array({json::array({0.0, 1.0, 5.0}), json::array({1.0, 0.0, 1.0}),
                                            json::array({5.0, 1.0, 0.0})});
  CHECK(first_violation(pts) == ErrorCode::BadQuadrature);

  doc = toy_doc();
  doc["horizon"]["T"] = -1.0;
  CHECK_FALSE(validate_model(doc).ok());
}

TEST_CASE("f_max bounds the node rates over the whole simplex and lip_f bounds increments") {
  const ValidatedModel m = testmodels::from_text(testmodels::autonomous());
  const std::size_t F = m.states.field_size();
  Rng rng(9);
  double seen = 0.0;
  std::vector<double> g(F), h(F);
  for (int draw = 0; draw < 20000; ++draw) {
    // Uniform point of the simplex (normalized exponentials), scaled by a
    // factor in [0, 1] so the sub-simplex used without self edges is covered.
    double total = 0.0;
    for (double& x : g) total += x = rng.exponential(1.0);
    const double scale = rng.uniform();
    for (double& x : g) x *= scale / total;
    total = 0.0;
    for (double& x : h) total += x = rng.exponential(1.0);
    for (double& x : h) x /= total;
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) {
        if (a == b) continue;
        const double f = eval_node_rate(m.node, a, b, g);
        seen = std::max(seen, f);
        CHECK(f <= m.node.f_max * (1.0 + 1e-12));
        double l1 = 0.0;
        for (std::size_t i = 0; i < F; ++i) l1 += std::abs(g[i] - h[i]);
        CHECK(std::abs(f - eval_node_rate(m.node, a, b, h)) <= m.node.lip_f * l1 + 1e-12);
      }
  }
  // The bound is attained at a vertex: softplus(-0.5 + 1.2).
  CHECK(m.node.f_max == doctest::Approx(std::log1p(std::exp(0.7))));
  CHECK(seen <= m.node.f_max);
  CHECK(m.node.lip_f == doctest::Approx(1.2));
}

TEST_CASE("node and edge rate evaluation") {
  const ValidatedModel m = testmodels::from_text(testmodels::autonomous());
  std::vector<double> g{0.1, 0.2, 0.3, 0.4};
  // g[a * G + zeta]: weight 1.2 sits on (a = strong, zeta = on) = index 3.
  CHECK(eval_node_rate(m.node, 0, 1, g) == doctest::Approx(softplus(-0.5 + 1.2 * 0.4)));
  CHECK(thrown_code([&] { eval_node_rate(m.node, 1, 1, g); }) == ErrorCode::SameState);
  CHECK(thrown_code([&] { eval_node_rate(m.node, 0, 2, g); }) == ErrorCode::IndexOutOfRange);
  std::vector<double> short_g{0.5};
  CHECK_THROWS_AS(eval_node_rate(m.node, 0, 1, short_g), Error);
  // Autonomous: sigma_j is ignored.
  CHECK(eval_edge_rate(m.edge, 0, 1, 0, 1) == 1.0);
  CHECK(eval_edge_rate(m.edge, 0, 1, 1, 1) == 1.0);
  CHECK(eval_edge_rate(m.edge, 1, 0, 1, 0) == 0.8);
  CHECK(m.edge.l_max == 1.0);
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(softplus(800.0) == 800.0);
}

TEST_CASE("absent transitions have rate exactly zero and table rates clamp at zero") {
  const ValidatedModel m = load_model(std::string(ADNET_SOURCE_DIR) + "/models/symmetric_points.toml");
  std::vector<double> g(m.states.field_size(), 0.1);
  CHECK(eval_node_rate(m.node, 0, 2, g) == 0.0);
  CHECK(eval_node_rate(m.node, 2, 1, g) == 0.0);
  CHECK(eval_node_rate(m.node, 0, 1, g) > 0.0);
}

TEST_CASE("spatial domain geometry") {
  const ValidatedModel m = testmodels::from_text(testmodels::autonomous(10));
  const SpatialDomain& d = m.domain;
  CHECK(d.size() == 10);
  CHECK(d.distance({0.05, 0}, {0.95, 0}) == doctest::Approx(0.1));
  CHECK(d.diameter() == doctest::Approx(0.5));
  CHECK(d.cell_of({0.96, 0}) == 0);
  CHECK(d.cell_of({0.34, 0}) == 3);
  CHECK(d.contains({0.5, 0}));
  CHECK_FALSE(d.contains({1.5, 0}));
  const auto pos = d.default_positions(20);
  CHECK(pos[5][0] == doctest::Approx(0.25));

  const ValidatedModel p = load_model(std::string(ADNET_SOURCE_DIR) + "/models/symmetric_points.toml");
  CHECK(p.domain.distance({0, 0}, {2, 0}) == 2.0);
  CHECK(p.domain.diameter() == 2.0);
  const auto sites = p.domain.default_positions(10);
  int first = 0;
  for (const auto& s : sites) first += s[0] == 0.0;
  CHECK(first == 5);  // weight 0.5 of 10 nodes
}

TEST_CASE("initial kernel normalization and first-state independence") {
  const ValidatedModel m = testmodels::from_text(testmodels::autonomous(12));
  std::vector<double> rho(2), kappa(2);
  for (const Position& x : m.domain.nodes) {
    m.initial.rho(m.domain, x, rho);
    CHECK(rho[0] + rho[1] == doctest::Approx(1.0));
    CHECK(m.initial.rho(m.domain, x, 1) == doctest::Approx(0.4 + 0.25 * std::cos(2 * M_PI * x[0])));
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) {
        m.initial.kappa(m.domain, x, m.domain.nodes[3], a, b, kappa);
        CHECK(kappa[0] + kappa[1] == doctest::Approx(1.0));
        CHECK(kappa[1] == doctest::Approx(b == 0 ? 0.3 : 0.6));
      }
  }
  CHECK(m.initial.kappa_ignores_first());

  const ValidatedModel p = load_model(std::string(ADNET_SOURCE_DIR) + "/models/symmetric_points.toml");
  p.initial.kappa(p.domain, {0, 0}, {2, 0}, 0, 0, kappa);
  const double lambda = std::exp(-2.0 / 1.0);
  CHECK(kappa[1] == doctest::Approx(lambda * 0.6 + (1 - lambda) * 0.1));
}
