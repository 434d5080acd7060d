#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "adnet/sim/network.hpp"

namespace adnet {

enum class EventKind : std::uint8_t { Node = 0, Edge = 1 };

/// Which system an event moves. Interacting runs use Single; coupled runs
/// tag shared firings Shared (both systems), and residual firings
/// InteractingOnly or DecoupledOnly.
enum class Channel : std::uint8_t { Single = 0, Shared = 1, InteractingOnly = 2, DecoupledOnly = 3 };

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::Node;
  std::uint32_t j = 0;
  std::uint32_t k = 0;  // equals j for node events
  State old_state = 0;
  State new_state = 0;
  Channel channel = Channel::Single;
  bool operator==(const Event&) const = default;
};

struct EventLog {
  std::vector<Event> events;
  bool operator==(const EventLog&) const = default;
};

void apply_event(NetworkState& state, const Event& event);

/// Replays an interacting-system log from its initial state.
NetworkState replay(const NetworkState& initial, const EventLog& log);

/// Replays a coupled log onto (interacting, decoupled) initial states.
void replay_coupled(NetworkState& interacting, NetworkState& decoupled, const EventLog& log);

std::string_view to_string(EventKind kind) noexcept;
std::string_view to_string(Channel channel) noexcept;

}  // namespace adnet
