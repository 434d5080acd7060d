#include <algorithm>
#include <cmath>
#include <numbers>

#include "adnet/model/model.hpp"

namespace adnet {
namespace {

double wrap_gap(double a, double b) {
  double d = std::fabs(a - b);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

std::size_t wrap_index(double x, std::size_t m) {
  const double scaled = std::floor(x * static_cast<double>(m) + 0.5);
  const auto mm = static_cast<long long>(m);
  long long i = static_cast<long long>(scaled) % mm;
  if (i < 0) i += mm;
  return static_cast<std::size_t>(i);
}

}  // namespace

double SpatialDomain::distance(const Position& x, const Position& y) const {
  if (kind == DomainKind::Points) {
    const auto i = static_cast<std::size_t>(x[0]);
    const auto j = static_cast<std::size_t>(y[0]);
    return metric[i * size() + j];
  }
  const double dx = wrap_gap(x[0], y[0]);
  if (dimension == 1) return dx;
  const double dy = wrap_gap(x[1], y[1]);
  return std::sqrt(dx * dx + dy * dy);
}

double SpatialDomain::diameter() const {
  if (kind == DomainKind::Points)
    return metric.empty() ? 0.0 : *std::max_element(metric.begin(), metric.end());
  return 0.5 * std::sqrt(static_cast<double>(dimension));
}

bool SpatialDomain::contains(const Position& x) const {
  if (kind == DomainKind::Points) {
    const double i = x[0];
    return i >= 0.0 && i < static_cast<double>(size()) && i == std::floor(i) && x[1] == 0.0;
  }
  const auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v < 1.0; };
  if (!in_unit(x[0])) return false;
  return dimension == 1 ? x[1] == 0.0 : in_unit(x[1]);
}

std::size_t SpatialDomain::cell_of(const Position& x) const {
  if (kind == DomainKind::Points) return static_cast<std::size_t>(x[0]);
  if (dimension == 1) return wrap_index(x[0], per_axis);
  return wrap_index(x[0], per_axis) * per_axis + wrap_index(x[1], per_axis);
}

std::vector<Position> SpatialDomain::default_positions(std::size_t n) const {
  std::vector<Position> out(n, Position{0.0, 0.0});
  const double dn = static_cast<double>(n);
  if (kind == DomainKind::Points) {
    std::size_t site = 0;
    double cumulative = weights.empty() ? 0.0 : weights[0];
    for (std::size_t j = 0; j < n; ++j) {
      const double q = (static_cast<double>(j) + 0.5) / dn;
      while (q > cumulative && site + 1 < size()) cumulative += weights[++site];
      out[j][0] = static_cast<double>(site);
    }
    return out;
  }
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j][0] = static_cast<double>(j) / dn;
    if (dimension == 2) {
      const double v = static_cast<double>(j) * golden;
      out[j][1] = v - std::floor(v);
    }
  }
  return out;
}

double SpatialDomain::phase(const Position& x) const {
  if (kind == DomainKind::Points) return x[0] / static_cast<double>(size());
  return x[0];
}

double softplus(double x) noexcept {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double NodeRateSpec::rate(std::size_t alpha, std::size_t beta,
                          std::span<const double> g) const {
  const std::size_t idx = alpha * node_count + beta;
  if (!present[idx]) return 0.0;
  const double* w = weights.data() + idx * field_size();
  double acc = bias[idx];
  for (std::size_t i = 0; i < field_size(); ++i) acc += w[i] * g[i];
  if (family == NodeRateFamily::Table) return acc < 0.0 ? 0.0 : acc;
  return softplus(acc);
}

bool NodeRateSpec::field_independent() const {
  return std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; });
}

double EdgeRateSpec::exit_rate(std::size_t b, std::size_t sj, std::size_t sk) const {
  double total = 0.0;
  for (std::size_t a = 0; a < edge_count; ++a)
    if (a != b) total += rate(b, a, sj, sk);
  return total;
}

void InitialKernel::rho(const SpatialDomain& domain, const Position& x,
                        std::span<double> out) const {
  if (domain.kind == DomainKind::Points && !node_by_site.empty()) {
    const auto site = static_cast<std::size_t>(x[0]);
    for (std::size_t a = 0; a < node_count; ++a) out[a] = node_by_site[site * node_count + a];
    return;
  }
  const double c =
      domain.kind == DomainKind::Torus ? std::cos(2.0 * std::numbers::pi * x[0]) : 0.0;
  for (std::size_t a = 0; a < node_count; ++a)
    out[a] = node_base[a] + (node_modulation.empty() ? 0.0 : node_modulation[a] * c);
}

double InitialKernel::rho(const SpatialDomain& domain, const Position& x,
                          std::size_t alpha) const {
  std::vector<double> tmp(node_count);
  rho(domain, x, tmp);
  return tmp[alpha];
}

void InitialKernel::kappa(const SpatialDomain& domain, const Position& x, const Position& y,
                          std::size_t alpha, std::size_t beta,
                          std::span<double> out) const {
  const std::size_t off = (alpha * node_count + beta) * edge_count;
  if (edge_far.empty()) {
    for (std::size_t a = 0; a < edge_count; ++a) out[a] = edge_near[off + a];
    return;
  }
  const double lambda = std::exp(-domain.distance(x, y) / length_scale);
  for (std::size_t a = 0; a < edge_count; ++a)
    out[a] = lambda * edge_near[off + a] + (1.0 - lambda) * edge_far[off + a];
}

bool InitialKernel::kappa_ignores_first() const {
  const auto check = [&](const std::vector<double>& table) {
    for (std::size_t alpha = 1; alpha < node_count; ++alpha)
      for (std::size_t beta = 0; beta < node_count; ++beta)
        for (std::size_t a = 0; a < edge_count; ++a)
          if (table[(alpha * node_count + beta) * edge_count + a] !=
              table[beta * edge_count + a])
            return false;
    return true;
  };
  return check(edge_near) && (edge_far.empty() || check(edge_far));
}

double eval_node_rate(const NodeRateSpec& spec, std::size_t alpha, std::size_t beta,
                      std::span<const double> g) {
  if (alpha >= spec.node_count || beta >= spec.node_count)
    fail(ErrorCode::IndexOutOfRange, "node state out of range");
  if (alpha == beta) fail(ErrorCode::SameState, "node transition requires alpha != beta");
  if (g.size() != spec.field_size())
    fail(ErrorCode::InvalidArgument, "field table has wrong size");
  return spec.rate(alpha, beta, g);
}

double eval_edge_rate(const EdgeRateSpec& spec, std::size_t b, std::size_t a,
                      std::size_t sj, std::size_t sk) {
  if (b >= spec.edge_count || a >= spec.edge_count || sj >= spec.node_count ||
      sk >= spec.node_count)
    fail(ErrorCode::IndexOutOfRange, "state out of range");
  if (a == b) fail(ErrorCode::SameState, "edge transition requires b != a");
  if (spec.mode == EdgeMode::Autonomous) sj = 0;
  return spec.rate(b, a, sj, sk);
}

}  // namespace adnet
