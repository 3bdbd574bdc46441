#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "s2p/config.hpp"
#include "s2p/geometry.hpp"
#include "s2p/tpv_world.hpp"

namespace s2p {

struct PdController {
  ControllerGains gains;
  double tolerance = 0.05;  // meters, waypoint reached
  double omega_max = 1.5;   // rad/s
};

struct TraceSample {
  double t = 0.0;
  RobotPose pose;
  int active = 0;  // index of the waypoint being tracked
  bool operator==(const TraceSample&) const = default;
};

enum class TrackStatus { Completed, Stopped, Collided, MaxTicksExceeded };
std::string_view to_string(TrackStatus s) noexcept;

struct TrackResult {
  std::vector<TraceSample> trace;  // starts with the initial pose at t = 0
  int reached = 0;
  bool collided = false;
  TrackStatus status = TrackStatus::Completed;
  /// Smallest obstacle clearance of the robot centre along the trace.
  double min_clearance = 0.0;
  RobotPose final_pose() const { return trace.back().pose; }
};

struct TrackOptions {
  const ObstacleMap* obstacles = nullptr;  // collision checks skipped when null
  double collision_radius = kRobotRadius;
  int max_ticks = 2000;
  /// Checked after every tick; returning true ends tracking with Stopped.
  std::function<bool(const RobotPose&)> stop;
};

/// Follows the polyline start -> path[0] -> path[1] ... with a unicycle:
///   omega = -k_heading * e_heading - k_crosstrack * e_ct   (|omega| <= omega_max)
/// where e_heading is the heading error towards the active waypoint and e_ct
/// the signed distance to the active segment (left positive). Speed is v_lin,
/// halved while |e_heading| > 45 degrees. Partial traces are returned with
/// MaxTicksExceeded when the tick budget runs out.
TrackResult pd_track(const RobotPose& start, std::span<const WorldPoint> path, const PdController& ctrl,
                     const TrackOptions& options = {});

}  // namespace s2p
