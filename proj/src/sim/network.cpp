#include "adnet/sim/network.hpp"

#include <algorithm>

#include "adnet/rng.hpp"
#include "adnet/sim/events.hpp"

namespace adnet {

void NetworkState::field(std::size_t j, std::span<double> out) const {
  const double inv = 1.0 / static_cast<double>(n);
  const std::int32_t* c = counts.data() + j * field_size();
  for (std::size_t i = 0; i < field_size(); ++i) out[i] = c[i] * inv;
}

void NetworkState::recount() {
  counts.assign(n * field_size(), 0);
  for (std::size_t j = 0; j < n; ++j) {
    std::int32_t* c = counts.data() + j * field_size();
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j && !include_self_edges) continue;
      ++c[edges[j * n + k] * G + sigma[k]];
    }
  }
}

bool NetworkState::counts_consistent() const {
  NetworkState copy = *this;
  copy.recount();
  return copy.counts == counts;
}

void NetworkState::set_node(std::size_t k, State s) {
  const State old = sigma[k];
  if (old == s) return;
  const std::size_t F = field_size();
  std::int32_t* c = counts.data();
  for (std::size_t j = 0; j < n; ++j) {
    if (j == k && !include_self_edges) continue;
    const std::size_t base = j * F + edges[j * n + k] * G;
    --c[base + old];
    ++c[base + s];
  }
  sigma[k] = s;
}

void NetworkState::set_edge(std::size_t j, std::size_t k, State a) {
  const State b = edges[j * n + k];
  if (a == b) return;
  const std::size_t F = field_size();
  counts[j * F + b * G + sigma[k]] -= 1;
  counts[j * F + a * G + sigma[k]] += 1;
  edges[j * n + k] = a;
  if (symmetric && j != k) {
    counts[k * F + b * G + sigma[j]] -= 1;
    counts[k * F + a * G + sigma[j]] += 1;
    edges[k * n + j] = a;
  }
}

NetworkState make_network_state(const ValidatedModel& model, std::span<const State> sigma,
                                 std::span<const State> edges, bool include_self_edges) {
  NetworkState s;
  s.n = sigma.size();
  s.G = model.G();
  s.E = model.E();
  s.symmetric = model.edge.symmetric();
  s.include_self_edges = include_self_edges;
  if (edges.size() != s.n * s.n) fail(ErrorCode::LengthMismatch, "edge array must be n x n");
  s.sigma.assign(sigma.begin(), sigma.end());
  s.edges.assign(edges.begin(), edges.end());
  for (const State x : s.sigma)
    if (x >= s.G) fail(ErrorCode::IndexOutOfRange, "node state out of range");
  for (std::size_t j = 0; j < s.n; ++j)
    for (std::size_t k = 0; k < s.n; ++k) {
      if (j == k && !include_self_edges) {
        s.edges[j * s.n + k] = 0;
        continue;
      }
      if (s.edges[j * s.n + k] >= s.E) fail(ErrorCode::IndexOutOfRange, "edge state out of range");
      if (s.symmetric && s.edges[j * s.n + k] != s.edges[k * s.n + j])
        fail(ErrorCode::InvalidArgument, "symmetric mode needs a symmetric edge array");
    }
  s.recount();
  return s;
}

std::vector<double> local_empirical_measure(const NetworkState& state, std::size_t j) {
  if (j >= state.n) fail(ErrorCode::IndexOutOfRange, "node index out of range");
  std::vector<double> g(state.field_size(), 0.0);
  const double inv = 1.0 / static_cast<double>(state.n);
  for (std::size_t k = 0; k < state.n; ++k) {
    if (k == j && !state.include_self_edges) continue;
    g[state.edge(j, k) * state.G + state.sigma[k]] += inv;
  }
  return g;
}

NetworkState sample_initial_network(const ValidatedModel& model, std::size_t n,
                                    std::span<const Position> positions, std::uint64_t seed,
                                    bool include_self_edges) {
  if (positions.size() != n) fail(ErrorCode::LengthMismatch, "need one position per node");
  for (const Position& p : positions)
    if (!model.domain.contains(p)) fail(ErrorCode::PositionOutOfDomain, "node position outside the domain");
  const std::size_t G = model.G(), E = model.E();
  const InitialKernel& kernel = model.initial;
  Rng rng(derive_seed(seed, "initial"));

  NetworkState s;
  s.n = n;
  s.G = G;
  s.E = E;
  s.symmetric = model.edge.symmetric();
  s.include_self_edges = include_self_edges;
  s.sigma.resize(n);
  s.edges.assign(n * n, 0);

  std::vector<double> rho(G);
  for (std::size_t j = 0; j < n; ++j) {
    kernel.rho(model.domain, positions[j], rho);
    s.sigma[j] = static_cast<State>(rng.categorical(rho));
  }

  // Without distance mixing kappa depends on the state pair only; rows that
  // are point masses need no draw.
  const bool pair_only = kernel.edge_far.empty();
  std::vector<int> degenerate(G * G, -1);
  if (pair_only) {
    for (std::size_t p = 0; p < G * G; ++p)
      for (std::size_t a = 0; a < E; ++a)
        if (kernel.edge_near[p * E + a] == 1.0) degenerate[p] = static_cast<int>(a);
  }
  std::vector<double> kappa(E);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k0 = s.symmetric ? j : 0;
    for (std::size_t k = k0; k < n; ++k) {
      if (k == j && !include_self_edges) continue;
      const std::size_t pair = s.sigma[j] * G + s.sigma[k];
      State a;
      if (pair_only && degenerate[pair] >= 0) {
        a = static_cast<State>(degenerate[pair]);
      } else if (pair_only) {
        a = static_cast<State>(
            rng.categorical(std::span<const double>(kernel.edge_near.data() + pair * E, E)));
      } else {
        kernel.kappa(model.domain, positions[j], positions[k], s.sigma[j], s.sigma[k], kappa);
        a = static_cast<State>(rng.categorical(kappa));
      }
      s.edges[j * n + k] = a;
      if (s.symmetric) s.edges[k * n + j] = a;
    }
  }
  s.recount();
  return s;
}

void apply_event(NetworkState& state, const Event& event) {
  if (event.kind == EventKind::Node) {
    if (event.j >= state.n) fail(ErrorCode::IndexOutOfRange, "event node out of range");
    if (state.sigma[event.j] != event.old_state)
      fail(ErrorCode::InvalidArgument, "event does not match the node state");
    state.set_node(event.j, event.new_state);
  } else {
    if (event.j >= state.n || event.k >= state.n)
      fail(ErrorCode::IndexOutOfRange, "event edge out of range");
    if (state.edge(event.j, event.k) != event.old_state)
      fail(ErrorCode::InvalidArgument, "event does not match the edge state");
    state.set_edge(event.j, event.k, event.new_state);
  }
  state.time = event.time;
}

NetworkState replay(const NetworkState& initial, const EventLog& log) {
  NetworkState state = initial;
  for (const Event& e : log.events) apply_event(state, e);
  return state;
}

void replay_coupled(NetworkState& interacting, NetworkState& decoupled, const EventLog& log) {
  for (const Event& e : log.events) {
    if (e.channel != Channel::DecoupledOnly) apply_event(interacting, e);
    if (e.channel == Channel::Shared || e.channel == Channel::DecoupledOnly) apply_event(decoupled, e);
  }
}

std::string_view to_string(EventKind kind) noexcept {
  return kind == EventKind::Node ? "node" : "edge";
}

std::string_view to_string(Channel channel) noexcept {
  switch (channel) {
    case Channel::Single: return "single";
    case Channel::Shared: return "shared";
    case Channel::InteractingOnly: return "interacting";
    case Channel::DecoupledOnly: return "decoupled";
  }
  return "unknown";
}

}  // namespace adnet
