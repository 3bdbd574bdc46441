#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "s2p/annotator.hpp"
#include "s2p/config.hpp"
#include "s2p/geometry.hpp"
#include "s2p/rng.hpp"
#include "s2p/types.hpp"

namespace s2p {

struct RobotPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // radians, counter-clockwise from +x
  WorldPoint position() const noexcept { return {x, y}; }
  bool operator==(const RobotPose&) const = default;
};

struct TpvObstacle {
  Polygon shape;
  /// Placed after the floor mask was captured, so the mask still shows floor.
  bool late = false;
  bool operator==(const TpvObstacle&) const = default;
};

inline constexpr int kTpvFrameWidth = 640;
inline constexpr int kTpvFrameHeight = 480;
inline constexpr double kRobotRadius = 0.1;  // meters; closer to an obstacle is a collision
inline constexpr double kGoalRadius = 0.3;   // meters

/// Room seen by a fixed camera. World units are meters, the room spans
/// `bounds`; `homography` maps the ground plane to image pixels.
struct TpvScene {
  Bounds bounds;
  std::vector<TpvObstacle> obstacles;
  RobotPose robot;
  WorldPoint goal;
  double goal_radius = kGoalRadius;
  Homography homography = Homography::Identity();
  int image_width = kTpvFrameWidth;
  int image_height = kTpvFrameHeight;
  std::string room_id;

  /// Ground truth including late obstacles, walls included.
  ObstacleMap obstacle_map() const;
  bool operator==(const TpvScene&) const = default;
};

void to_json(nlohmann::json& j, const TpvScene& s);
void from_json(const nlohmann::json& j, TpvScene& s);
void validate(const TpvScene& s);

/// Camera model for a room of the given size: floor corners map to a
/// trapezoid, the far wall narrower than the near one.
Homography room_homography(const Bounds& bounds, int width = kTpvFrameWidth, int height = kTpvFrameHeight);

/// Floor segmentation as captured at setup: room floor minus the obstacles
/// present at that time.
FloorMask capture_floor_mask(const TpvScene& scene);

/// Schematic camera image. The static background is rasterized once; each
/// frame only adds the robot.
class TpvRenderer {
 public:
  explicit TpvRenderer(const TpvScene& scene);
  Frame render(const RobotPose& pose, std::uint64_t tick = 0) const;

 private:
  Homography h_;
  Frame background_;
};

/// Keypoints around the robot, danger flags from the full obstacle map, the
/// red goal circle, optionally cropped to the labels (`crop_margin` < 0
/// disables the crop).
AnnotatedFrame tpv_annotate(const TpvScene& scene, const Frame& frame, const FloorMask& mask,
                            const RingSpec& ring, int crop_margin);

/// Occupancy grid on the ground plane; cells within `inflation` of an
/// obstacle or wall are blocked.
class OccupancyGrid {
 public:
  OccupancyGrid(const ObstacleMap& obstacles, const Bounds& bounds, double inflation,
                double resolution);

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double resolution() const noexcept { return resolution_; }
  bool blocked(int ix, int iy) const noexcept;
  bool blocked(WorldPoint p) const noexcept;
  int index_x(double x) const noexcept;
  int index_y(double y) const noexcept;
  WorldPoint centre(int ix, int iy) const noexcept;
  /// Every sample along [a, b] (spacing `step`) is free; the first `skip`
  /// meters are not checked.
  bool segment_free(WorldPoint a, WorldPoint b, double step = 0.02, double skip = 0.0) const noexcept;

 private:
  Bounds bounds_;
  double resolution_;
  int nx_;
  int ny_;
  std::vector<std::uint8_t> blocked_;
};

/// Geodesic distance to `goal` over free grid cells (8-connected).
class GeodesicField {
 public:
  GeodesicField(const OccupancyGrid& grid, WorldPoint goal);
  /// +inf for blocked or unreachable positions.
  double at(WorldPoint p) const noexcept;

 private:
  const OccupancyGrid* grid_;
  std::vector<double> dist_;
};

struct TpvSceneSpec {
  double min_width = 4.0;
  double max_width = 6.0;
  double min_depth = 3.5;
  double max_depth = 5.0;
  int min_obstacles = 3;
  int max_obstacles = 6;
  double late_probability = 0.3;
  double min_goal_distance = 1.5;
  double robot_clearance = 0.45;
  double goal_clearance = 0.4;
};

/// Planning inflation used by the ground-truth planner: the danger band plus
/// a tracking margin.
inline constexpr double kPlanningInflation = kDangerInflation + 0.1;
inline constexpr double kGridResolution = 0.05;

/// Seeded room with box obstacles; robot and goal are clear of obstacles and
/// connected on the planning grid.
TpvScene generate_tpv_scene(const TpvSceneSpec& spec, Rng& rng);

/// Same room, new initial heading drawn from `rng` (per-run perturbation).
TpvScene perturb_heading(TpvScene scene, Rng& rng);

}  // namespace s2p
