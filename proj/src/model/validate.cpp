#include <algorithm>
#include <cmath>
#include <set>

#include "adnet/model/model.hpp"

namespace adnet {
namespace {

using nlohmann::json;

constexpr double kSumTolerance = 1e-12;

[[noreturn]] void shape_error(const std::string& where, const std::string& what) {
  fail(ErrorCode::ParseError, where + ": " + what);
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!obj.is_object()) shape_error(where, "expected a table");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      fail(ErrorCode::UnknownKey, where + ": unknown key '" + key + "'");
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) shape_error(where, std::string("missing key '") + key + "'");
  return obj.at(key);
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) shape_error(where, "expected a number");
  return v.get<double>();
}

std::vector<double> as_vector(const json& v, std::size_t size, const std::string& where) {
  if (!v.is_array() || v.size() != size)
    shape_error(where, "expected an array of " + std::to_string(size) + " numbers");
  std::vector<double> out;
  out.reserve(size);
  for (const auto& x : v) out.push_back(as_number(x, where));
  return out;
}

std::vector<double> as_matrix(const json& v, std::size_t rows, std::size_t cols,
                              const std::string& where) {
  if (!v.is_array() || v.size() != rows)
    shape_error(where, "expected " + std::to_string(rows) + " rows");
  std::vector<double> out;
  out.reserve(rows * cols);
  for (const auto& row : v) {
    const auto r = as_vector(row, cols, where);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

std::size_t array_depth(const json& v) {
  std::size_t depth = 0;
  const json* cur = &v;
  while (cur->is_array() && !cur->empty()) {
    ++depth;
    cur = &cur->front();
  }
  return depth;
}

std::vector<std::string> parse_alphabet(const json& v, const std::string& where) {
  std::vector<std::string> names;
  if (v.is_number_integer()) {
    const auto count = v.get<long long>();
    if (count < 1 || count > 255) shape_error(where, "alphabet size must be in [1, 255]");
    for (long long i = 0; i < count; ++i) names.push_back(std::to_string(i));
    return names;
  }
  if (!v.is_array()) shape_error(where, "expected a list of state names or a count");
  for (const auto& x : v) {
    if (!x.is_string()) shape_error(where, "state names must be strings");
    names.push_back(x.get<std::string>());
  }
  if (names.size() > 255) shape_error(where, "at most 255 states");
  return names;
}

std::size_t state_ref(const json& v, const std::vector<std::string>& alphabet,
                      const std::string& where) {
  if (v.is_number_integer()) {
    const auto i = v.get<long long>();
    if (i < 0 || static_cast<std::size_t>(i) >= alphabet.size())
      shape_error(where, "state index out of range");
    return static_cast<std::size_t>(i);
  }
  if (v.is_string()) {
    const auto it = std::find(alphabet.begin(), alphabet.end(), v.get<std::string>());
    if (it == alphabet.end()) shape_error(where, "unknown state '" + v.get<std::string>() + "'");
    return static_cast<std::size_t>(it - alphabet.begin());
  }
  shape_error(where, "state must be an index or a name");
}

// Reads a conditional edge table given as [a], [beta][a] or [alpha][beta][a].
std::vector<double> edge_table(const json& v, std::size_t G, std::size_t E,
                               const std::string& where) {
  std::vector<double> out(G * G * E);
  switch (array_depth(v)) {
    case 1: {
      const auto row = as_vector(v, E, where);
      for (std::size_t p = 0; p < G * G; ++p) std::copy(row.begin(), row.end(), out.begin() + p * E);
      break;
    }
    case 2: {
      const auto by_beta = as_matrix(v, G, E, where);
      for (std::size_t alpha = 0; alpha < G; ++alpha)
        std::copy(by_beta.begin(), by_beta.end(), out.begin() + alpha * G * E);
      break;
    }
    case 3: {
      if (v.size() != G) shape_error(where, "expected " + std::to_string(G) + " blocks");
      for (std::size_t alpha = 0; alpha < G; ++alpha) {
        const auto block = as_matrix(v[alpha], G, E, where);
        std::copy(block.begin(), block.end(), out.begin() + alpha * G * E);
      }
      break;
    }
    default: shape_error(where, "expected a 1-, 2- or 3-level nested array");
  }
  return out;
}

class Builder {
 public:
  explicit Builder(const json& raw) : raw_(raw) {}

  ValidationReport run() {
    check_keys(raw_, {"name", "description", "states", "domain", "node_rates", "edge_rates",
                      "initial", "horizon"},
               "model");
    states();
    domain();
    node_rates();
    edge_rates();
    initial();
    horizon();
    ValidationReport report;
    report.violations = std::move(violations_);
    if (report.violations.empty()) report.model = std::move(model_);
    return report;
  }

 private:
  void violation(ErrorCode code, std::string location, std::string message) {
    violations_.push_back({code, std::move(location), std::move(message)});
  }

  void states() {
    const json& s = require(raw_, "states", "model");
    check_keys(s, {"node", "edge"}, "states");
    model_.states.node_states = parse_alphabet(require(s, "node", "states"), "states.node");
    model_.states.edge_states = parse_alphabet(require(s, "edge", "states"), "states.edge");
    for (const auto* list : {&model_.states.node_states, &model_.states.edge_states}) {
      if (list->size() < 2) shape_error("states", "each alphabet needs at least 2 states");
      std::set<std::string> unique(list->begin(), list->end());
      if (unique.size() != list->size()) shape_error("states", "state names must be distinct");
    }
  }

  void domain() {
    const json& d = require(raw_, "domain", "model");
    check_keys(d, {"kind", "dimension", "quadrature", "weights", "distances"}, "domain");
    const json& kind = require(d, "kind", "domain");
    if (!kind.is_string()) shape_error("domain.kind", "expected a string");
    SpatialDomain& dom = model_.domain;
    if (kind == "torus") {
      if (d.contains("weights") || d.contains("distances"))
        shape_error("domain", "torus quadrature is uniform; weights/distances not allowed");
      dom.kind = DomainKind::Torus;
      dom.dimension = d.contains("dimension") ? d.at("dimension").get<int>() : 1;
      if (dom.dimension != 1 && dom.dimension != 2)
        shape_error("domain.dimension", "torus dimension must be 1 or 2");
      const json& q = require(d, "quadrature", "domain");
      if (!q.is_number_integer() || q.get<long long>() < 1)
        shape_error("domain.quadrature", "expected a positive integer");
      dom.per_axis = q.get<std::size_t>();
      const double m = static_cast<double>(dom.per_axis);
      if (dom.dimension == 1) {
        for (std::size_t i = 0; i < dom.per_axis; ++i)
          dom.nodes.push_back({static_cast<double>(i) / m, 0.0});
      } else {
        for (std::size_t i = 0; i < dom.per_axis; ++i)
          for (std::size_t j = 0; j < dom.per_axis; ++j)
            dom.nodes.push_back({static_cast<double>(i) / m, static_cast<double>(j) / m});
      }
      dom.weights.assign(dom.nodes.size(), 1.0 / static_cast<double>(dom.nodes.size()));
      return;
    }
    if (kind != "points") shape_error("domain.kind", "expected \"torus\" or \"points\"");
    if (d.contains("dimension") || d.contains("quadrature"))
      shape_error("domain", "point sets take weights and distances only");
    dom.kind = DomainKind::Points;
    const json& w = require(d, "weights", "domain");
    if (!w.is_array() || w.empty()) shape_error("domain.weights", "expected a nonempty array");
    const std::size_t q = w.size();
    dom.weights = as_vector(w, q, "domain.weights");
    dom.metric = as_matrix(require(d, "distances", "domain"), q, q, "domain.distances");
    for (std::size_t i = 0; i < q; ++i) dom.nodes.push_back({static_cast<double>(i), 0.0});

    double total = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      if (!(dom.weights[i] >= 0.0))
        violation(ErrorCode::BadQuadrature, "domain.weights[" + std::to_string(i) + "]",
                  "negative quadrature weight");
      total += dom.weights[i];
    }
    if (std::fabs(total - 1.0) > kSumTolerance)
      violation(ErrorCode::BadQuadrature, "domain.weights", "weights must sum to 1");
    const auto& m = dom.metric;
    for (std::size_t i = 0; i < q; ++i) {
      if (m[i * q + i] != 0.0)
        violation(ErrorCode::BadQuadrature, "domain.distances", "nonzero diagonal");
      for (std::size_t j = 0; j < q; ++j) {
        if (m[i * q + j] < 0.0 || m[i * q + j] != m[j * q + i])
          violation(ErrorCode::BadQuadrature, "domain.distances",
                    "distances must be nonnegative and symmetric");
      }
    }
    if (q <= 200) {
      for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = 0; j < q; ++j)
          for (std::size_t k = 0; k < q; ++k)
            if (m[i * q + k] > m[i * q + j] + m[j * q + k] + 1e-12) {
              violation(ErrorCode::BadQuadrature, "domain.distances",
                        "triangle inequality fails at (" + std::to_string(i) + "," +
                            std::to_string(j) + "," + std::to_string(k) + ")");
              return;
            }
    }
  }

  void node_rates() {
    const std::size_t G = model_.G(), E = model_.E(), F = G * E;
    const json& n = require(raw_, "node_rates", "model");
    check_keys(n, {"family", "transition"}, "node_rates");
    NodeRateSpec& spec = model_.node;
    spec.node_count = G;
    spec.edge_count = E;
    spec.present.assign(G * G, 0);
    spec.bias.assign(G * G, 0.0);
    spec.weights.assign(G * G * F, 0.0);
    const std::string family = n.contains("family") ? n.at("family").get<std::string>()
                                                    : std::string("affine-softplus");
    if (family == "affine-softplus") {
      spec.family = NodeRateFamily::AffineSoftplus;
    } else if (family == "table") {
      spec.family = NodeRateFamily::Table;
    } else {
      shape_error("node_rates.family", "expected \"affine-softplus\" or \"table\"");
    }
    if (n.contains("transition")) {
      const json& list = n.at("transition");
      if (!list.is_array()) shape_error("node_rates.transition", "expected [[node_rates.transition]] entries");
      for (std::size_t t = 0; t < list.size(); ++t) {
        const std::string where = "node_rates.transition[" + std::to_string(t) + "]";
        const json& tr = list[t];
        check_keys(tr, {"from", "to", "bias", "weights"}, where);
        const std::size_t alpha = state_ref(require(tr, "from", where), model_.states.node_states, where + ".from");
        const std::size_t beta = state_ref(require(tr, "to", where), model_.states.node_states, where + ".to");
        if (alpha == beta) {
          violation(ErrorCode::SameState, where, "node transition from a state to itself");
          continue;
        }
        const std::size_t idx = alpha * G + beta;
        if (spec.present[idx]) shape_error(where, "duplicate transition");
        spec.present[idx] = 1;
        spec.bias[idx] = tr.contains("bias") ? as_number(tr.at("bias"), where + ".bias") : 0.0;
        if (tr.contains("weights")) {
          const auto w = as_matrix(tr.at("weights"), E, G, where + ".weights");
          std::copy(w.begin(), w.end(), spec.weights.begin() + idx * F);
        }
        if (spec.family == NodeRateFamily::Table) {
          if (spec.bias[idx] < 0.0)
            violation(ErrorCode::NegativeRate, where + ".bias", "table rates must be nonnegative");
          for (std::size_t i = 0; i < F; ++i)
            if (spec.weights[idx * F + i] < 0.0) {
              violation(ErrorCode::NegativeRate, where + ".weights",
                        "table rates must be nonnegative");
              break;
            }
        }
      }
    }
    // The finite system's field has mass (n-1)/n, so the bound is taken over
    // the convex hull of the simplex vertices and the origin.
    double f_max = 0.0, lip = 0.0;
    for (std::size_t idx = 0; idx < G * G; ++idx) {
      if (!spec.present[idx]) continue;
      double top = spec.bias[idx];
      for (std::size_t i = 0; i < F; ++i) {
        const double w = spec.weights[idx * F + i];
        top = std::max(top, spec.bias[idx] + w);
        lip = std::max(lip, std::fabs(w));
      }
      const double value = spec.family == NodeRateFamily::Table ? std::max(top, 0.0) : softplus(top);
      f_max = std::max(f_max, value);
    }
    spec.f_max = f_max;
    spec.lip_f = lip;
  }

  void edge_rates() {
    const std::size_t G = model_.G(), E = model_.E();
    const json& e = require(raw_, "edge_rates", "model");
    check_keys(e, {"mode", "transition"}, "edge_rates");
    EdgeRateSpec& spec = model_.edge;
    spec.node_count = G;
    spec.edge_count = E;
    spec.rates.assign(E * E * G * G, 0.0);
    const std::string mode = require(e, "mode", "edge_rates").get<std::string>();
    if (mode == "symmetric") {
      spec.mode = EdgeMode::Symmetric;
    } else if (mode == "asymmetric") {
      spec.mode = EdgeMode::Asymmetric;
    } else if (mode == "autonomous") {
      spec.mode = EdgeMode::Autonomous;
    } else {
      shape_error("edge_rates.mode", "expected \"symmetric\", \"asymmetric\" or \"autonomous\"");
    }
    std::vector<std::uint8_t> seen(E * E, 0);
    if (e.contains("transition")) {
      const json& list = e.at("transition");
      if (!list.is_array()) shape_error("edge_rates.transition", "expected [[edge_rates.transition]] entries");
      for (std::size_t t = 0; t < list.size(); ++t) {
        const std::string where = "edge_rates.transition[" + std::to_string(t) + "]";
        const json& tr = list[t];
        check_keys(tr, {"from", "to", "rates", "presynaptic", "constant"}, where);
        const std::size_t b = state_ref(require(tr, "from", where), model_.states.edge_states, where + ".from");
        const std::size_t a = state_ref(require(tr, "to", where), model_.states.edge_states, where + ".to");
        const int forms = static_cast<int>(tr.contains("rates")) +
                          static_cast<int>(tr.contains("presynaptic")) +
                          static_cast<int>(tr.contains("constant"));
        if (forms != 1) shape_error(where, "give exactly one of rates, presynaptic, constant");
        if (b == a) {
          violation(ErrorCode::SameState, where, "edge transition from a state to itself");
          continue;
        }
        if (seen[b * E + a]) shape_error(where, "duplicate transition");
        seen[b * E + a] = 1;
        std::vector<double> table(G * G);
        if (tr.contains("rates")) {
          table = as_matrix(tr.at("rates"), G, G, where + ".rates");
        } else if (tr.contains("presynaptic")) {
          const auto row = as_vector(tr.at("presynaptic"), G, where + ".presynaptic");
          for (std::size_t sj = 0; sj < G; ++sj)
            std::copy(row.begin(), row.end(), table.begin() + sj * G);
        } else {
          std::fill(table.begin(), table.end(), as_number(tr.at("constant"), where + ".constant"));
        }
        for (const double r : table)
          if (!(r >= 0.0)) {
            violation(ErrorCode::NegativeRate, where, "edge rates must be nonnegative");
            break;
          }
        if (spec.mode == EdgeMode::Autonomous) {
          for (std::size_t sj = 1; sj < G; ++sj)
            for (std::size_t sk = 0; sk < G; ++sk)
              if (table[sj * G + sk] != table[sk]) {
                violation(ErrorCode::InconsistentAutonomousTable, where + ".rates",
                          "autonomous rates may depend on the partner state only");
                sj = G;
                break;
              }
        }
        std::copy(table.begin(), table.end(), spec.rates.begin() + (b * E + a) * G * G);
      }
    }
    spec.l_max = spec.rates.empty() ? 0.0 : *std::max_element(spec.rates.begin(), spec.rates.end());
  }

  void initial() {
    const std::size_t G = model_.G(), E = model_.E();
    const json& i = require(raw_, "initial", "model");
    check_keys(i, {"node_base", "node_modulation", "node_by_site", "edge_near", "edge_far",
                   "length_scale"},
               "initial");
    InitialKernel& k = model_.initial;
    k.node_count = G;
    k.edge_count = E;
    const SpatialDomain& dom = model_.domain;
    if (i.contains("node_by_site")) {
      if (dom.kind != DomainKind::Points)
        shape_error("initial.node_by_site", "per-site node laws need a point-set domain");
      if (i.contains("node_base") || i.contains("node_modulation"))
        shape_error("initial", "node_by_site excludes node_base/node_modulation");
      k.node_by_site = as_matrix(i.at("node_by_site"), dom.size(), G, "initial.node_by_site");
      k.node_base.assign(G, 0.0);
    } else {
      k.node_base = as_vector(require(i, "node_base", "initial"), G, "initial.node_base");
      if (i.contains("node_modulation")) {
        if (dom.kind != DomainKind::Torus)
          shape_error("initial.node_modulation", "modulation is defined on the torus only");
        k.node_modulation = as_vector(i.at("node_modulation"), G, "initial.node_modulation");
      }
    }
    k.edge_near = edge_table(require(i, "edge_near", "initial"), G, E, "initial.edge_near");
    if (i.contains("edge_far")) {
      k.edge_far = edge_table(i.at("edge_far"), G, E, "initial.edge_far");
      k.length_scale = as_number(require(i, "length_scale", "initial"), "initial.length_scale");
      if (!(k.length_scale > 0.0))
        shape_error("initial.length_scale", "length scale must be positive");
    } else if (i.contains("length_scale")) {
      shape_error("initial.length_scale", "length_scale requires edge_far");
    }

    std::vector<double> rho(G);
    for (std::size_t q = 0; q < dom.size(); ++q) {
      k.rho(dom, dom.nodes[q], rho);
      double total = 0.0;
      bool negative = false;
      for (const double r : rho) {
        total += r;
        negative = negative || !(r >= 0.0);
      }
      if (negative || std::fabs(total - 1.0) > kSumTolerance) {
        violation(ErrorCode::UnnormalizedKernel, "initial.node",
                  "node law is not a probability vector at quadrature node " + std::to_string(q));
        break;
      }
    }
    if (!k.node_modulation.empty()) {
      // Covers every x, not only quadrature nodes.
      for (std::size_t a = 0; a < G; ++a)
        if (k.node_base[a] - std::fabs(k.node_modulation[a]) < 0.0)
          violation(ErrorCode::UnnormalizedKernel, "initial.node_modulation",
                    "node law becomes negative between quadrature nodes");
    }
    const auto rows_ok = [&](const std::vector<double>& t, const char* name) {
      for (std::size_t p = 0; p < G * G; ++p) {
        double total = 0.0;
        for (std::size_t a = 0; a < E; ++a) {
          if (!(t[p * E + a] >= 0.0)) {
            violation(ErrorCode::UnnormalizedKernel, name, "negative edge probability");
            return;
          }
          total += t[p * E + a];
        }
        if (std::fabs(total - 1.0) > kSumTolerance) {
          violation(ErrorCode::UnnormalizedKernel, name, "edge law rows must sum to 1");
          return;
        }
      }
    };
    rows_ok(k.edge_near, "initial.edge_near");
    if (!k.edge_far.empty()) rows_ok(k.edge_far, "initial.edge_far");
  }

  void horizon() {
    const json& h = require(raw_, "horizon", "model");
    check_keys(h, {"T"}, "horizon");
    model_.horizon = as_number(require(h, "T", "horizon"), "horizon.T");
    if (!(model_.horizon > 0.0) || !std::isfinite(model_.horizon))
      violation(ErrorCode::InvalidArgument, "horizon.T", "horizon must be positive");
  }

  const json& raw_;
  ValidatedModel model_;
  std::vector<Violation> violations_;
};

}  // namespace

ValidationReport validate_model(const nlohmann::json& raw) {
  if (!raw.is_object()) fail(ErrorCode::ParseError, "model document must be a table");
  try {
    return Builder(raw).run();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed model: ") + e.what());
  }
}

ValidatedModel require_valid(const nlohmann::json& raw) {
  ValidationReport report = validate_model(raw);
  if (!report.ok()) {
    const Violation& v = report.violations.front();
    fail(v.code, v.location + ": " + v.message);
  }
  return std::move(*report.model);
}

}  // namespace adnet
