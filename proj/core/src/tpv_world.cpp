#include "s2p/tpv_world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>

#include <nlohmann/json.hpp>

#include "s2p/error.hpp"

namespace s2p {

using nlohmann::json;

ObstacleMap TpvScene::obstacle_map() const {
  ObstacleMap map;
  map.bounds = bounds;
  for (const auto& o : obstacles) map.polygons.push_back(o.shape);
  return map;
}

void to_json(json& j, const TpvScene& s) {
  json obstacles = json::array();
  for (const auto& o : s.obstacles) {
    json pts = json::array();
    for (const auto& p : o.shape) pts.push_back({p.x, p.y});
    obstacles.push_back({{"points", pts}, {"late", o.late}});
  }
  j = json{{"bounds", {s.bounds.min_x, s.bounds.min_y, s.bounds.max_x, s.bounds.max_y}},
           {"obstacles", obstacles},
           {"robot", {{"x", s.robot.x}, {"y", s.robot.y}, {"theta", s.robot.theta}}},
           {"goal", {s.goal.x, s.goal.y}},
           {"goal_radius", s.goal_radius},
           {"homography", homography_to_json(s.homography)},
           {"image", {s.image_width, s.image_height}},
           {"room_id", s.room_id}};
}

void from_json(const json& j, TpvScene& s) {
  const auto b = j.at("bounds").get<std::vector<double>>();
  if (b.size() != 4) throw Error(ErrorCode::InvalidArgument, "bounds");
  s.bounds = {b[0], b[1], b[2], b[3]};
  s.obstacles.clear();
  for (const auto& o : j.at("obstacles")) {
    TpvObstacle ob;
    for (const auto& p : o.at("points")) ob.shape.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    ob.late = o.value("late", false);
    s.obstacles.push_back(std::move(ob));
  }
  const auto& r = j.at("robot");
  s.robot = {r.at("x").get<double>(), r.at("y").get<double>(), r.at("theta").get<double>()};
  s.goal = {j.at("goal").at(0).get<double>(), j.at("goal").at(1).get<double>()};
  s.goal_radius = j.value("goal_radius", kGoalRadius);
  const auto image = j.value("image", std::vector<int>{kTpvFrameWidth, kTpvFrameHeight});
  if (image.size() != 2) throw Error(ErrorCode::InvalidArgument, "image");
  s.image_width = image[0];
  s.image_height = image[1];
  s.homography = j.contains("homography") ? homography_from_json(j.at("homography"))
                                          : room_homography(s.bounds, s.image_width, s.image_height);
  s.room_id = j.value("room_id", std::string());
  validate(s);
}

void validate(const TpvScene& s) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(s.bounds.max_x > s.bounds.min_x && s.bounds.max_y > s.bounds.min_y)) fail("bounds");
  if (s.image_width <= 0 || s.image_height <= 0) fail("image size");
  if (!(s.goal_radius > 0)) fail("goal radius");
  for (const auto& o : s.obstacles)
    if (o.shape.size() < 3) fail("obstacle polygon needs three points");
  const auto map = s.obstacle_map();
  if (!s.bounds.contains(s.robot.position()) || map.clearance(s.robot.position()) <= 0.0)
    fail("robot not on free space");
  if (!s.bounds.contains(s.goal) || map.clearance(s.goal) <= 0.0) fail("goal not on free space");
}

Homography room_homography(const Bounds& b, int width, int height) {
  const double sx = width / 640.0;
  const double sy = height / 480.0;
  const std::array<WorldPoint, 4> world{{{b.min_x, b.min_y}, {b.max_x, b.min_y}, {b.max_x, b.max_y}, {b.min_x, b.max_y}}};
  const std::array<PixelPoint, 4> image{{{40 * sx, 460 * sy}, {600 * sx, 460 * sy}, {520 * sx, 40 * sy}, {120 * sx, 40 * sy}}};
  return homography_from_points(world, image);
}

namespace {

bool inside_any(const std::vector<TpvObstacle>& obstacles, WorldPoint p, bool include_late, bool* late_hit) {
  for (const auto& o : obstacles) {
    if (o.late && !include_late) continue;
    if (contains(o.shape, p)) {
      if (late_hit) *late_hit = o.late;
      return true;
    }
  }
  return false;
}

}  // namespace

FloorMask capture_floor_mask(const TpvScene& scene) {
  FloorMask mask(scene.image_width, scene.image_height, false);
  const Homography inv = scene.homography.inverse();
  for (int v = 0; v < mask.height; ++v)
    for (int u = 0; u < mask.width; ++u) {
      const WorldPoint w = unproject(inv, {static_cast<double>(u), static_cast<double>(v)});
      if (scene.bounds.contains(w) && !inside_any(scene.obstacles, w, false, nullptr)) mask.set(u, v, true);
    }
  return mask;
}

TpvRenderer::TpvRenderer(const TpvScene& scene)
    : h_(scene.homography), background_(scene.image_width, scene.image_height, Rgb{50, 50, 56}, FrameSource::TpvSim) {
  std::uint32_t hash = 2166136261u;
  for (unsigned char c : scene.room_id) hash = (hash ^ c) * 16777619u;
  const int tint = static_cast<int>(hash % 31) - 15;
  const Rgb floor{static_cast<std::uint8_t>(205 + tint / 2), static_cast<std::uint8_t>(198 - tint / 3),
                  static_cast<std::uint8_t>(184 + tint)};
  const Rgb grid{static_cast<std::uint8_t>(floor.r - 18), static_cast<std::uint8_t>(floor.g - 18),
                 static_cast<std::uint8_t>(floor.b - 18)};
  const Homography inv = h_.inverse();
  for (int v = 0; v < background_.height(); ++v)
    for (int u = 0; u < background_.width(); ++u) {
      const WorldPoint w = unproject(inv, {static_cast<double>(u), static_cast<double>(v)});
      if (!scene.bounds.contains(w)) continue;
      bool late = false;
      if (inside_any(scene.obstacles, w, true, &late)) {
        background_.set(u, v, late ? Rgb{70, 90, 160} : Rgb{120, 84, 54});
        continue;
      }
      // Floor tiles every 0.5 m.
      const double fx = std::fmod(w.x - scene.bounds.min_x, 0.5);
      const double fy = std::fmod(w.y - scene.bounds.min_y, 0.5);
      background_.set(u, v, (fx < 0.012 || fy < 0.012) ? grid : floor);
    }
}

Frame TpvRenderer::render(const RobotPose& pose, std::uint64_t tick) const {
  std::vector<std::uint8_t> data(background_.data().begin(), background_.data().end());
  Frame f(background_.width(), background_.height(), std::move(data), FrameSource::TpvSim, tick);
  const PixelPoint c = project(h_, pose.position());
  const PixelPoint edge = project(h_, {pose.x + kRobotRadius, pose.y});
  const double r = std::max(3.0, distance(c, edge));
  const int r_ceil = static_cast<int>(std::ceil(r));
  for (int dy = -r_ceil; dy <= r_ceil; ++dy)
    for (int dx = -r_ceil; dx <= r_ceil; ++dx)
      if (dx * dx + dy * dy <= r * r)
        f.blend_set(static_cast<int>(std::lround(c.u)) + dx, static_cast<int>(std::lround(c.v)) + dy, {30, 60, 140});
  const PixelPoint nose = project(h_, {pose.x + 1.8 * kRobotRadius * std::cos(pose.theta),
                                       pose.y + 1.8 * kRobotRadius * std::sin(pose.theta)});
  const int steps = std::max(1, static_cast<int>(distance(c, nose)));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    f.blend_set(static_cast<int>(std::lround(c.u + t * (nose.u - c.u))),
                static_cast<int>(std::lround(c.v + t * (nose.v - c.v))), {255, 255, 255});
  }
  return f;
}

AnnotatedFrame tpv_annotate(const TpvScene& scene, const Frame& frame, const FloorMask& mask,
                            const RingSpec& ring, int crop_margin) {
  AnnotatedFrame af;
  af.base = frame;
  af.setup = Setup::Tpv;
  const PixelPoint robot_px = project(scene.homography, scene.robot.position());
  af.labels = mark_dangerous(tpv_keypoints(robot_px, mask, ring, scene.homography), scene.obstacle_map());
  const PixelPoint goal_px = project(scene.homography, scene.goal);
  const PixelPoint goal_edge = project(scene.homography, {scene.goal.x + 0.12, scene.goal.y});
  GoalMarker goal;
  goal.kind = GoalKind::RedCircle;
  goal.pos = goal_px;
  goal.radius = std::max(5.0, distance(goal_px, goal_edge));
  af.goal = goal;
  if (crop_margin >= 0) af = crop_to_labels(af, crop_margin);
  return af;
}

OccupancyGrid::OccupancyGrid(const ObstacleMap& obstacles, const Bounds& bounds, double inflation,
                             double resolution)
    : bounds_(bounds), resolution_(resolution) {
  if (!(resolution > 0)) throw Error(ErrorCode::Range, "resolution");
  nx_ = std::max(1, static_cast<int>(std::ceil((bounds.max_x - bounds.min_x) / resolution)));
  ny_ = std::max(1, static_cast<int>(std::ceil((bounds.max_y - bounds.min_y) / resolution)));
  blocked_.assign(static_cast<std::size_t>(nx_) * ny_, 0);
  for (int iy = 0; iy < ny_; ++iy)
    for (int ix = 0; ix < nx_; ++ix)
      blocked_[static_cast<std::size_t>(iy) * nx_ + ix] = obstacles.clearance(centre(ix, iy)) < inflation;
}

bool OccupancyGrid::blocked(int ix, int iy) const noexcept {
  if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return true;
  return blocked_[static_cast<std::size_t>(iy) * nx_ + ix] != 0;
}

int OccupancyGrid::index_x(double x) const noexcept {
  return static_cast<int>(std::floor((x - bounds_.min_x) / resolution_));
}

int OccupancyGrid::index_y(double y) const noexcept {
  return static_cast<int>(std::floor((y - bounds_.min_y) / resolution_));
}

bool OccupancyGrid::blocked(WorldPoint p) const noexcept { return blocked(index_x(p.x), index_y(p.y)); }

WorldPoint OccupancyGrid::centre(int ix, int iy) const noexcept {
  return {bounds_.min_x + (ix + 0.5) * resolution_, bounds_.min_y + (iy + 0.5) * resolution_};
}

bool OccupancyGrid::segment_free(WorldPoint a, WorldPoint b, double step, double skip) const noexcept {
  const double len = distance(a, b);
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    if (t * len < skip) continue;
    if (blocked(WorldPoint{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)})) return false;
  }
  return true;
}

GeodesicField::GeodesicField(const OccupancyGrid& grid, WorldPoint goal) : grid_(&grid) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const int nx = grid.nx();
  dist_.assign(static_cast<std::size_t>(nx) * grid.ny(), kInf);
  const int gx = grid.index_x(goal.x);
  const int gy = grid.index_y(goal.y);
  if (grid.blocked(gx, gy)) return;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist_[static_cast<std::size_t>(gy) * nx + gx] = 0.0;
  open.push({0.0, gy * nx + gx});
  const double r = grid.resolution();
  const double diag = r * std::sqrt(2.0);
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    if (d > dist_[static_cast<std::size_t>(idx)]) continue;
    const int x = idx % nx;
    const int y = idx / nx;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        if (grid.blocked(x + dx, y + dy)) continue;
        if (dx != 0 && dy != 0 && (grid.blocked(x + dx, y) || grid.blocked(x, y + dy))) continue;
        const double nd = d + (dx != 0 && dy != 0 ? diag : r);
        const auto ni = static_cast<std::size_t>((y + dy) * nx + x + dx);
        if (nd < dist_[ni]) {
          dist_[ni] = nd;
          open.push({nd, static_cast<int>(ni)});
        }
      }
  }
}

double GeodesicField::at(WorldPoint p) const noexcept {
  const int ix = grid_->index_x(p.x);
  const int iy = grid_->index_y(p.y);
  if (grid_->blocked(ix, iy)) return std::numeric_limits<double>::infinity();
  return dist_[static_cast<std::size_t>(iy) * grid_->nx() + ix];
}

namespace {

std::optional<TpvScene> try_generate(const TpvSceneSpec& spec, Rng& rng) {
  TpvScene s;
  const double w = rng.uniform(spec.min_width, spec.max_width);
  const double d = rng.uniform(spec.min_depth, spec.max_depth);
  s.bounds = {0.0, 0.0, w, d};
  s.homography = room_homography(s.bounds);
  const auto n = rng.uniform_int(spec.min_obstacles, spec.max_obstacles);
  for (std::int64_t i = 0; i < n; ++i) {
    const WorldPoint c{rng.uniform(0.3, w - 0.3), rng.uniform(0.3, d - 0.3)};
    const double hw = rng.uniform(0.15, 0.45);
    const double hh = rng.uniform(0.15, 0.45);
    s.obstacles.push_back({make_box(c, hw, hh, rng.uniform(0.0, kPi)), false});
  }
  if (rng.bernoulli(spec.late_probability)) {
    const WorldPoint c{rng.uniform(0.3, w - 0.3), rng.uniform(0.3, d - 0.3)};
    s.obstacles.push_back({make_box(c, rng.uniform(0.1, 0.25), rng.uniform(0.1, 0.25), rng.uniform(0.0, kPi)), true});
  }
  const auto map = s.obstacle_map();
  auto sample_free = [&](double clearance) -> std::optional<WorldPoint> {
    for (int attempt = 0; attempt < 200; ++attempt) {
      const WorldPoint p{rng.uniform(0.0, w), rng.uniform(0.0, d)};
      if (map.clearance(p) >= clearance) return p;
    }
    return std::nullopt;
  };
  const auto robot = sample_free(spec.robot_clearance);
  if (!robot) return std::nullopt;
  s.robot = {robot->x, robot->y, rng.uniform(-kPi, kPi)};

  const OccupancyGrid grid(map, s.bounds, kPlanningInflation, kGridResolution);
  for (int attempt = 0; attempt < 50; ++attempt) {
    const auto goal = sample_free(spec.goal_clearance);
    if (!goal) return std::nullopt;
    if (distance(*goal, s.robot.position()) < spec.min_goal_distance) continue;
    const GeodesicField field(grid, *goal);
    if (!std::isfinite(field.at(s.robot.position()))) continue;
    s.goal = *goal;
    return s;
  }
  return std::nullopt;
}

}  // namespace

TpvScene generate_tpv_scene(const TpvSceneSpec& spec, Rng& rng) {
  const std::uint64_t id = rng.next();
  for (int attempt = 0; attempt < 200; ++attempt) {
    if (auto s = try_generate(spec, rng)) {
      char buf[24];
      std::snprintf(buf, sizeof buf, "room-%08llx", static_cast<unsigned long long>(id & 0xffffffffu));
      s->room_id = buf;
      validate(*s);
      return *s;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "could not generate a room");
}

TpvScene perturb_heading(TpvScene scene, Rng& rng) {
  scene.robot.theta = rng.uniform(-kPi, kPi);
  return scene;
}

}  // namespace s2p
