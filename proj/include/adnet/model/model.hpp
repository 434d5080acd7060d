#pragma once

// Model description: alphabets, spatial domain with quadrature, node and edge
// rate families, product-form initial kernel and horizon. A ValidatedModel is
// immutable once built and is shared read-only by every solver.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "adnet/error.hpp"

namespace adnet {

using State = std::uint8_t;

/// Torus coordinates (unused trailing coordinates are 0), or for a finite
/// point set the site index stored in the first coordinate.
using Position = std::array<double, 2>;

struct StateSpaces {
  std::vector<std::string> node_states;
  std::vector<std::string> edge_states;

  std::size_t node_count() const { return node_states.size(); }
  std::size_t edge_count() const { return edge_states.size(); }
  /// Size of a local field table (edge state x node state).
  std::size_t field_size() const { return node_count() * edge_count(); }
};

enum class DomainKind { Torus, Points };

struct SpatialDomain {
  DomainKind kind = DomainKind::Torus;
  int dimension = 1;             // torus only
  std::size_t per_axis = 0;      // torus only: quadrature nodes per axis
  std::vector<Position> nodes;   // quadrature nodes
  std::vector<double> weights;   // quadrature weights, sum 1
  std::vector<double> metric;    // points only: row-major site distances

  std::size_t size() const { return nodes.size(); }
  double distance(const Position& x, const Position& y) const;
  double diameter() const;
  bool contains(const Position& x) const;
  /// Index of the quadrature node nearest to x (its cell).
  std::size_t cell_of(const Position& x) const;
  /// Deterministic default node positions: j/n on the circle, a Kronecker
  /// lattice on the 2-torus, weight quantiles on a point set.
  std::vector<Position> default_positions(std::size_t n) const;
  /// Periodic first coordinate in [0,1) used by smooth test functions.
  double phase(const Position& x) const;
};

enum class NodeRateFamily { AffineSoftplus, Table };

/// Field tables g are indexed [a * |node states| + zeta] (edge state major).
struct NodeRateSpec {
  NodeRateFamily family = NodeRateFamily::AffineSoftplus;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::vector<std::uint8_t> present;  // [alpha * G + beta]; absent => rate 0
  std::vector<double> bias;           // [alpha * G + beta]
  std::vector<double> weights;        // [(alpha * G + beta) * field + a * G + zeta]
  double f_max = 0.0;
  double lip_f = 0.0;

  std::size_t field_size() const { return node_count * edge_count; }
  std::span<const double> weights_for(std::size_t alpha, std::size_t beta) const {
    return {weights.data() + (alpha * node_count + beta) * field_size(), field_size()};
  }
  /// Rate without argument checks; alpha != beta assumed.
  double rate(std::size_t alpha, std::size_t beta, std::span<const double> g) const;
  /// True when no rate reads the field.
  bool field_independent() const;
};

enum class EdgeMode { Symmetric, Asymmetric, Autonomous };

struct EdgeRateSpec {
  EdgeMode mode = EdgeMode::Asymmetric;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::vector<double> rates;  // [((b * E + a) * G + sigma_j) * G + sigma_k], b == a entries 0
  double l_max = 0.0;

  double rate(std::size_t b, std::size_t a, std::size_t sj, std::size_t sk) const {
    return rates[((b * edge_count + a) * node_count + sj) * node_count + sk];
  }
  /// Sum over a != b of rate(b, a, sj, sk).
  double exit_rate(std::size_t b, std::size_t sj, std::size_t sk) const;
  bool symmetric() const { return mode == EdgeMode::Symmetric; }
};

/// rho_x(alpha) = base[alpha] + modulation[alpha] * cos(2 pi phase(x)) on the
/// torus, base[alpha] on a point set (or per-site table).
/// kappa_xy(a | alpha, beta) = lambda near + (1 - lambda) far with
/// lambda = exp(-d(x, y) / length_scale), or near alone when no far table.
struct InitialKernel {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::vector<double> node_base;
  std::vector<double> node_modulation;
  std::vector<double> node_by_site;  // points only: [site * G + alpha]
  std::vector<double> edge_near;     // [(alpha * G + beta) * E + a]
  std::vector<double> edge_far;      // empty or as edge_near
  double length_scale = 0.0;

  void rho(const SpatialDomain& domain, const Position& x, std::span<double> out) const;
  double rho(const SpatialDomain& domain, const Position& x, std::size_t alpha) const;
  void kappa(const SpatialDomain& domain, const Position& x, const Position& y,
             std::size_t alpha, std::size_t beta, std::span<double> out) const;
  /// True when kappa does not depend on the first node's state.
  bool kappa_ignores_first() const;
};

struct ValidatedModel {
  StateSpaces states;
  SpatialDomain domain;
  NodeRateSpec node;
  EdgeRateSpec edge;
  InitialKernel initial;
  double horizon = 1.0;

  std::size_t G() const { return states.node_count(); }
  std::size_t E() const { return states.edge_count(); }
};

struct Violation {
  ErrorCode code;
  std::string location;
  std::string message;
};

struct ValidationReport {
  std::optional<ValidatedModel> model;
  std::vector<Violation> violations;
  bool ok() const { return model.has_value(); }
};

/// Parses the model file syntax (a TOML subset: [table], [[array.of.tables]],
/// key = value with numbers, strings, booleans and nested arrays, # comments)
/// into a JSON document. Throws ParseError with a line number.
nlohmann::json parse_model_text(const std::string& text);

/// Reads a model file; ".json" files are parsed as JSON, anything else with
/// parse_model_text.
nlohmann::json load_model_document(const std::string& path);

/// Checks structure (unknown keys, shapes) and every invariant. Structural
/// problems throw (ParseError / UnknownKey); invariant failures are collected.
ValidationReport validate_model(const nlohmann::json& raw);

/// validate_model, throwing the first violation as an Error.
ValidatedModel require_valid(const nlohmann::json& raw);

ValidatedModel load_model(const std::string& path);

double softplus(double x) noexcept;

/// f_{alpha -> beta}(g). Throws SameState when alpha == beta and
/// InvalidArgument when g has the wrong size.
double eval_node_rate(const NodeRateSpec& spec, std::size_t alpha, std::size_t beta,
                      std::span<const double> g);

/// l_{b -> a}(sigma_j, sigma_k); sigma_j is ignored in autonomous mode.
double eval_edge_rate(const EdgeRateSpec& spec, std::size_t b, std::size_t a,
                      std::size_t sj, std::size_t sk);

}  // namespace adnet
