#include "s2p/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "s2p/error.hpp"

namespace s2p {

std::string_view to_string(TrackStatus s) noexcept {
  switch (s) {
    case TrackStatus::Completed: return "completed";
    case TrackStatus::Stopped: return "stopped";
    case TrackStatus::Collided: return "collided";
    case TrackStatus::MaxTicksExceeded: return "max_ticks_exceeded";
  }
  return "completed";
}

TrackResult pd_track(const RobotPose& start, std::span<const WorldPoint> path, const PdController& ctrl,
                     const TrackOptions& options) {
  if (path.empty()) throw Error(ErrorCode::InvalidArgument, "empty path");
  const auto& g = ctrl.gains;
  if (!(g.dt > 0 && g.dt <= 0.1)) throw Error(ErrorCode::Range, "dt");
  if (!(g.k_heading > 0 && g.k_crosstrack > 0 && g.v_lin > 0)) throw Error(ErrorCode::Range, "gains");

  TrackResult r;
  RobotPose pose = start;
  r.trace.push_back({0.0, pose, 0});
  r.min_clearance = options.obstacles ? options.obstacles->clearance(pose.position())
                                      : std::numeric_limits<double>::infinity();
  std::size_t active = 0;
  WorldPoint seg_start = start.position();
  auto advance = [&] {
    while (active < path.size() && distance(pose.position(), path[active]) < ctrl.tolerance) {
      seg_start = path[active];
      ++active;
      ++r.reached;
    }
  };
  advance();
  if (active == path.size()) return r;

  for (int tick = 0; tick < options.max_ticks; ++tick) {
    const WorldPoint wp = path[active];
    const double bearing = std::atan2(wp.y - pose.y, wp.x - pose.x);
    const double e_heading = wrap_angle(pose.theta - bearing);
    double e_ct = 0.0;
    const double sx = wp.x - seg_start.x;
    const double sy = wp.y - seg_start.y;
    const double seg_len = std::hypot(sx, sy);
    if (seg_len > 1e-9) e_ct = (sx * (pose.y - seg_start.y) - sy * (pose.x - seg_start.x)) / seg_len;
    const double omega =
        std::clamp(-g.k_heading * e_heading - g.k_crosstrack * e_ct, -ctrl.omega_max, ctrl.omega_max);
    const double v = std::abs(e_heading) > kPi / 4 ? 0.5 * g.v_lin : g.v_lin;

    pose.x += v * std::cos(pose.theta) * g.dt;
    pose.y += v * std::sin(pose.theta) * g.dt;
    pose.theta = wrap_angle(pose.theta + omega * g.dt);
    advance();
    r.trace.push_back({(tick + 1) * g.dt, pose, static_cast<int>(std::min(active, path.size() - 1))});

    if (options.obstacles) {
      const double c = options.obstacles->clearance(pose.position());
      r.min_clearance = std::min(r.min_clearance, c);
      if (c < options.collision_radius) {
        r.collided = true;
        r.status = TrackStatus::Collided;
        return r;
      }
    }
    if (options.stop && options.stop(pose)) {
      r.status = active == path.size() ? TrackStatus::Completed : TrackStatus::Stopped;
      return r;
    }
    if (active == path.size()) return r;
  }
  r.status = TrackStatus::MaxTicksExceeded;
  return r;
}

}  // namespace s2p
