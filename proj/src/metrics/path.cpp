#include <algorithm>

#include "adnet/metrics/path.hpp"

namespace adnet {

State TrajectoryPath::at(double t) const {
  const auto it = std::upper_bound(jumps.begin(), jumps.end(), t,
                                   [](double v, const Jump& j) { return v < j.time; });
  return it == jumps.begin() ? initial : std::prev(it)->state;
}

std::size_t TrajectoryPath::jumps_until(double t) const {
  const auto it = std::upper_bound(jumps.begin(), jumps.end(), t,
                                   [](double v, const Jump& j) { return v < j.time; });
  return static_cast<std::size_t>(it - jumps.begin());
}

void TrajectoryPath::push(double t, State s) {
  if (s == final_state()) return;
  jumps.push_back({t, s});
}

void TrajectoryPath::check() const {
  double last = 0.0;
  State state = initial;
  for (const Jump& j : jumps) {
    if (!(j.time > last) || j.time > horizon)
      fail(ErrorCode::InvalidArgument, "path jump times must increase within (0, horizon]");
    if (j.state == state) fail(ErrorCode::InvalidArgument, "path jump to the current state");
    last = j.time;
    state = j.state;
  }
}

double path_distance(const TrajectoryPath& x, const TrajectoryPath& y, double t) {
  constexpr double slack = 1e-12;
  if (t > x.horizon * (1.0 + slack) + slack || t > y.horizon * (1.0 + slack) + slack)
    fail(ErrorCode::HorizonMismatch, "path distance requested beyond a path horizon");
  double total = 0.0, prev = 0.0;
  State sx = x.initial, sy = y.initial;
  std::size_t i = 0, j = 0;
  const std::size_t nx = x.jumps.size(), ny = y.jumps.size();
  for (;;) {
    const double tx = i < nx ? x.jumps[i].time : t;
    const double ty = j < ny ? y.jumps[j].time : t;
    const double next = std::min({tx, ty, t});
    if (sx != sy) total += next - prev;
    if (next >= t) break;
    if (tx == next) sx = x.jumps[i++].state;
    if (ty == next) sy = y.jumps[j++].state;
    prev = next;
  }
  return total;
}

}  // namespace adnet
