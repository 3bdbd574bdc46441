#pragma once

#include <span>
#include <vector>

#include "s2p/controller.hpp"
#include "s2p/fpv_world.hpp"
#include "s2p/tpv_world.hpp"
#include "s2p/types.hpp"

namespace s2p {

/// Ground-truth FPV policy for one episode (the distance field depends only
/// on the static scene and the target).
///
/// Current command: DONE when the target is visible; inside the success
/// region, turn to face the target or tilt the camera; otherwise move along a
/// shortest grid path, turning first when the heading is not on one. Among
/// equally short first moves the heading closest to the target bearing wins.
/// The next command is a forecast: the motion the policy would choose after
/// executing the current one, ignoring DONE (0 after DONE).
class FpvOracle {
 public:
  explicit FpvOracle(const FpvScene& scene);

  int motion_command(const FpvScene& scene, bool allow_done) const;
  PlanAnswer answer(const FpvScene& scene) const;
  double shortest_path() const noexcept { return shortest_; }

 private:
  std::vector<double> dist_;
  double shortest_;
};

/// Rotation code among +-30/60/90 closest to `bearing` (left positive); ties
/// go to the smaller turn.
int rotation_toward(double bearing);

inline constexpr double kOracleMaxHop = 1.0;      // meters between consecutive waypoints
inline constexpr double kOracleOriginSkip = 0.1;  // meters of the first hop left unchecked
inline constexpr double kOracleSlack = 0.15;      // meters, see TpvOracle::plan

inline constexpr double kOracleProgress = 0.1;    // meters of geodesic gain a plan must achieve
inline constexpr double kOracleNarrowInflation = kDangerInflation + 0.02;

/// Ground-truth TPV planner on the true obstacle map (late obstacles
/// included). Nodes are the robot and the safe labels; edges join nodes at
/// most kOracleMaxHop apart whose segment stays out of the planning
/// inflation. The terminal node minimizes path length plus geodesic distance
/// to the goal; within kOracleSlack of that optimum the node closest to the
/// goal wins. When that route gains less than kOracleProgress or `controller`
/// cannot track it outside the danger band, the search is repeated with the
/// narrower kOracleNarrowInflation and that route is used if it tracks safely
/// and either gains or replaces an unsafe route. The answer lists the first
/// four labels of the path.
class TpvOracle {
 public:
  explicit TpvOracle(const TpvScene& scene, PdController controller = {});
  TpvOracle(const TpvOracle&) = delete;  // the field refers to the grid
  TpvOracle& operator=(const TpvOracle&) = delete;

  PlanAnswer plan(const RobotPose& robot, std::span<const Label> labels) const;
  const OccupancyGrid& grid() const noexcept { return grid_; }
  const GeodesicField& field() const noexcept { return field_; }

 private:
  static constexpr double kInfinity = 1e300;
  struct Route {
    std::vector<int> ids;
    double gain = -kInfinity;  // geodesic distance removed by the route
  };
  Route search(const RobotPose& robot, std::span<const Label> labels, const OccupancyGrid& grid,
               const GeodesicField& field) const;

  bool tracks_safely(const RobotPose& robot, std::span<const Label> labels, const Route& route) const;

  ObstacleMap obstacles_;
  PdController controller_;
  OccupancyGrid grid_;
  GeodesicField field_;
  OccupancyGrid narrow_grid_;
  GeodesicField narrow_field_;
  WorldPoint goal_;
};

}  // namespace s2p
