#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>
#include <nlohmann/json_fwd.hpp>

#include "s2p/types.hpp"

namespace s2p {

inline constexpr double kPi = 3.14159265358979323846;

double deg2rad(double deg);
double rad2deg(double rad);
/// Wraps to (-pi, pi].
double wrap_angle(double rad);
/// Wraps to [0, 360).
double wrap_degrees_360(double deg);
/// Wraps to (-180, 180].
double wrap_degrees_180(double deg);

double distance(WorldPoint a, WorldPoint b);
double distance(PixelPoint a, PixelPoint b);

using Polygon = std::vector<WorldPoint>;

Polygon make_box(WorldPoint center, double half_w, double half_h, double yaw = 0.0);
bool contains(const Polygon& poly, WorldPoint p);
double distance_to_segment(WorldPoint p, WorldPoint a, WorldPoint b);
/// 0 inside the polygon, otherwise distance to its boundary.
double distance_to_polygon(WorldPoint p, const Polygon& poly);

struct Bounds {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;
  bool operator==(const Bounds&) const = default;
  bool contains(WorldPoint p) const { return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y; }
  /// Distance from an inside point to the nearest wall; 0 outside.
  double clearance(WorldPoint p) const;
};

/// Ground-truth obstacles used for danger marking and collision checks.
/// Room walls count as obstacles when `bounds` is set.
struct ObstacleMap {
  std::vector<Polygon> polygons;
  std::optional<Bounds> bounds;

  /// Distance to the nearest obstacle or wall (0 when inside one).
  double clearance(WorldPoint p) const;
};

/// Ground plane (meters) to image (pixels) projective map.
using Homography = Eigen::Matrix3d;

PixelPoint project(const Homography& h, WorldPoint p);
WorldPoint unproject(const Homography& h_inv, PixelPoint p);
/// Exact homography through four correspondences; throws when degenerate.
Homography homography_from_points(std::span<const WorldPoint, 4> world,
                                  std::span<const PixelPoint, 4> image);
/// Nine numbers, row-major.
nlohmann::json homography_to_json(const Homography& h);
Homography homography_from_json(const nlohmann::json& j);

}  // namespace s2p
