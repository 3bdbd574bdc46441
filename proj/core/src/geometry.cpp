#include "s2p/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "s2p/error.hpp"

namespace s2p {

double deg2rad(double deg) { return deg * kPi / 180.0; }
double rad2deg(double rad) { return rad * 180.0 / kPi; }

double wrap_angle(double rad) {
  double a = std::fmod(rad + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

double wrap_degrees_360(double deg) {
  double a = std::fmod(deg, 360.0);
  if (a < 0.0) a += 360.0;
  if (a >= 360.0) a -= 360.0;
  return a;
}

double wrap_degrees_180(double deg) {
  double a = wrap_degrees_360(deg);
  return a > 180.0 ? a - 360.0 : a;
}

double distance(WorldPoint a, WorldPoint b) { return std::hypot(a.x - b.x, a.y - b.y); }
double distance(PixelPoint a, PixelPoint b) { return std::hypot(a.u - b.u, a.v - b.v); }

Polygon make_box(WorldPoint c, double half_w, double half_h, double yaw) {
  const double cs = std::cos(yaw);
  const double sn = std::sin(yaw);
  Polygon p;
  for (auto [sx, sy] : {std::pair{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}) {
    const double x = sx * half_w;
    const double y = sy * half_h;
    p.push_back({c.x + cs * x - sn * y, c.y + sn * x + cs * y});
  }
  return p;
}

bool contains(const Polygon& poly, WorldPoint p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
  }
  return inside;
}

double distance_to_segment(WorldPoint p, WorldPoint a, WorldPoint b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

double distance_to_polygon(WorldPoint p, const Polygon& poly) {
  if (poly.size() >= 3 && contains(poly, p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i)
    best = std::min(best, distance_to_segment(p, poly[i], poly[(i + 1) % poly.size()]));
  return best;
}

double Bounds::clearance(WorldPoint p) const {
  if (!contains(p)) return 0.0;
  return std::min({p.x - min_x, max_x - p.x, p.y - min_y, max_y - p.y});
}

double ObstacleMap::clearance(WorldPoint p) const {
  double best = std::numeric_limits<double>::infinity();
  if (bounds) best = bounds->clearance(p);
  for (const auto& poly : polygons) best = std::min(best, distance_to_polygon(p, poly));
  return best;
}

PixelPoint project(const Homography& h, WorldPoint p) {
  const Eigen::Vector3d q = h * Eigen::Vector3d(p.x, p.y, 1.0);
  return {q.x() / q.z(), q.y() / q.z()};
}

WorldPoint unproject(const Homography& h_inv, PixelPoint p) {
  const Eigen::Vector3d q = h_inv * Eigen::Vector3d(p.u, p.v, 1.0);
  return {q.x() / q.z(), q.y() / q.z()};
}

Homography homography_from_points(std::span<const WorldPoint, 4> world,
                                  std::span<const PixelPoint, 4> image) {
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double x = world[i].x;
    const double y = world[i].y;
    const double u = image[i].u;
    const double v = image[i].v;
    a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * i) = u;
    b(2 * i + 1) = v;
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!lu.isInvertible()) throw Error(ErrorCode::InvalidArgument, "degenerate homography correspondences");
  const Eigen::Matrix<double, 8, 1> h = lu.solve(b);
  Homography out;
  out << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  return out;
}

nlohmann::json homography_to_json(const Homography& h) {
  nlohmann::json j = nlohmann::json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) j.push_back(h(r, c));
  return j;
}

Homography homography_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 9) throw Error(ErrorCode::InvalidArgument, "homography must be 9 numbers");
  Homography h;
  for (int i = 0; i < 9; ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::InvalidArgument, "homography entry not a number");
    h(i / 3, i % 3) = j[i].get<double>();
  }
  if (std::abs(h.determinant()) < 1e-12) throw Error(ErrorCode::InvalidArgument, "homography not invertible");
  return h;
}

}  // namespace s2p
