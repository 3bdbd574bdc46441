#include "s2p/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "s2p/error.hpp"
#include "s2p/geometry.hpp"

namespace s2p {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string side_of(double bearing) {
  if (std::abs(bearing) <= 15.0) return "straight ahead";
  return bearing > 0 ? "on the left" : "on the right";
}

std::string explain_fpv(const FpvScene& s, int command) {
  const auto* t = s.find(s.target);
  std::string lead;
  const auto view = fpv_render(s).seen;
  for (const auto& o : view)
    if (o.object_class != s.target) {
      lead = "A " + o.object_class + " is visible " + side_of(o.bearing) + ". ";
      break;
    }
  const CommandMeaning m = meaning_of(command);
  switch (m.kind) {
    case CommandKind::Done:
      return "The " + s.target + " is " + side_of(relative_bearing(s.agent, t->cell)) +
             " and close enough, so the search is over.";
    case CommandKind::MoveForward:
      return lead + "The way ahead is free and leads towards the " + s.target + ", so the robot moves forward.";
    case CommandKind::Rotate: {
      const std::string dir = m.rotation_degrees > 0 ? "left" : "right";
      const std::string why = is_visible(s, *t) || in_success_region(s, s.agent.cell)
                                  ? "The " + s.target + " lies to the " + dir
                                  : "The " + s.target + " is not in view; the open route bends to the " + dir;
      return lead + why + ", so the robot turns " + dir + " by " +
             std::to_string(std::abs(m.rotation_degrees)) + " degrees.";
    }
    case CommandKind::LookUp:
      return "The " + s.target + " should be above the current view, so the camera tilts up.";
    case CommandKind::LookDown:
      return "The " + s.target + " should be below the current view, so the camera tilts down.";
  }
  return lead;
}

}  // namespace

int rotation_toward(double bearing) {
  int best = 30;
  double best_err = kInf;
  for (int r : {30, -30, 60, -60, 90, -90}) {
    const double err = std::abs(bearing - r);
    if (err < best_err - 1e-9) {
      best_err = err;
      best = r;
    }
  }
  return rotation_code(best);
}

FpvOracle::FpvOracle(const FpvScene& scene)
    : dist_(distance_to_success(scene)), shortest_(dist_[scene.index(scene.agent.cell)]) {}

int FpvOracle::motion_command(const FpvScene& s, bool allow_done) const {
  const auto* t = s.find(s.target);
  if (t == nullptr) throw Error(ErrorCode::InvalidArgument, "target missing");
  const auto& a = s.agent;
  if (allow_done && is_visible(s, *t)) return 0;
  if (in_success_region(s, a.cell)) {
    const double b = relative_bearing(a, t->cell);
    if (std::abs(b) > kFpvHalfFov) return rotation_toward(b);
    if (!pitch_permits(a.pitch, t->elevation, cell_distance(a.cell, t->cell)))
      return t->elevation == Elevation::High ? 8 : 9;
    return forward_cell(s, a.cell, a.heading) ? 4 : 0;
  }

  double best = kInf;
  std::vector<std::pair<int, double>> scored;
  for (int h = 0; h < 360; h += 30) {
    const auto f = forward_cell(s, a.cell, h);
    if (!f) continue;
    const double score = cell_distance(a.cell, *f) + dist_[s.index(*f)];
    scored.push_back({h, score});
    best = std::min(best, score);
  }
  if (!std::isfinite(best)) return rotation_code(90);
  const double target_abs = rad2deg(std::atan2(t->cell.y - a.cell.y, t->cell.x - a.cell.x));
  int chosen = -1;
  double chosen_key1 = kInf;
  double chosen_key2 = kInf;
  for (const auto& [h, score] : scored) {
    if (score > best + 1e-9) continue;
    if (h == a.heading) return 4;
    const double k1 = std::abs(wrap_degrees_180(h - target_abs));
    const double k2 = std::abs(wrap_degrees_180(h - a.heading));
    if (k1 < chosen_key1 - 1e-9 || (std::abs(k1 - chosen_key1) <= 1e-9 && k2 < chosen_key2)) {
      chosen = h;
      chosen_key1 = k1;
      chosen_key2 = k2;
    }
  }
  const int delta = static_cast<int>(std::lround(wrap_degrees_180(chosen - a.heading)));
  return rotation_code(std::clamp(delta, -90, 90));
}

PlanAnswer FpvOracle::answer(const FpvScene& s) const {
  PlanAnswer p;
  const int current = motion_command(s, true);
  int next = 0;
  if (current != 0) next = motion_command(fpv_step(s, current).scene, false);
  p.commands = {current, next};
  p.explanation = explain_fpv(s, current);
  std::vector<std::string> objects;
  for (const auto& o : fpv_render(s).seen) objects.push_back(o.object_class);
  p.objects_seen = std::move(objects);
  return p;
}

TpvOracle::TpvOracle(const TpvScene& scene, PdController controller)
    : obstacles_(scene.obstacle_map()),
      controller_(controller),
      grid_(obstacles_, scene.bounds, kPlanningInflation, kGridResolution),
      field_(grid_, scene.goal),
      narrow_grid_(obstacles_, scene.bounds, kOracleNarrowInflation, kGridResolution),
      narrow_field_(narrow_grid_, scene.goal),
      goal_(scene.goal) {}

TpvOracle::Route TpvOracle::search(const RobotPose& robot, std::span<const Label> labels,
                                   const OccupancyGrid& grid, const GeodesicField& field) const {
  struct Node {
    int id;
    WorldPoint p;
    double geo;
  };
  std::vector<Node> nodes{{0, robot.position(), field.at(robot.position())}};
  for (const auto& l : labels) {
    if (l.kind == LabelKind::RobotOrigin || !l.world) continue;
    if (obstacles_.clearance(*l.world) < kDangerInflation || grid.blocked(*l.world)) continue;
    nodes.push_back({l.id, *l.world, field.at(*l.world)});
  }

  const std::size_t n = nodes.size();
  std::vector<double> d(n, kInf);
  std::vector<int> prev(n, -1);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  d[0] = 0.0;
  open.push({0.0, 0});
  while (!open.empty()) {
    const auto [dist, i] = open.top();
    open.pop();
    if (dist > d[i]) continue;
    for (std::size_t j = 1; j < n; ++j) {
      if (j == i) continue;
      const double len = distance(nodes[i].p, nodes[j].p);
      if (len > kOracleMaxHop || dist + len >= d[j]) continue;
      if (!grid.segment_free(nodes[i].p, nodes[j].p, 0.02, i == 0 ? kOracleOriginSkip : 0.0)) continue;
      d[j] = dist + len;
      prev[j] = static_cast<int>(i);
      open.push({d[j], j});
    }
  }

  double best_cost = kInf;
  for (std::size_t j = 1; j < n; ++j)
    if (std::isfinite(d[j]) && std::isfinite(nodes[j].geo)) best_cost = std::min(best_cost, d[j] + nodes[j].geo);
  Route route;
  if (!std::isfinite(best_cost)) return route;

  std::size_t terminal = 0;
  for (std::size_t j = 1; j < n; ++j) {
    if (!std::isfinite(d[j]) || !std::isfinite(nodes[j].geo)) continue;
    if (d[j] + nodes[j].geo > best_cost + kOracleSlack) continue;
    if (terminal == 0 || nodes[j].geo < nodes[terminal].geo - 1e-12 ||
        (std::abs(nodes[j].geo - nodes[terminal].geo) <= 1e-12 && nodes[j].id < nodes[terminal].id))
      terminal = j;
  }
  for (int i = static_cast<int>(terminal); i > 0; i = prev[static_cast<std::size_t>(i)])
    route.ids.push_back(nodes[static_cast<std::size_t>(i)].id);
  std::reverse(route.ids.begin(), route.ids.end());
  if (route.ids.size() > 4) route.ids.resize(4);
  // A robot inside the inflation has no field value; any reachable terminal counts as progress.
  route.gain = std::isfinite(nodes[0].geo) ? nodes[0].geo - nodes[terminal].geo : kInfinity;
  return route;
}

bool TpvOracle::tracks_safely(const RobotPose& robot, std::span<const Label> labels, const Route& route) const {
  std::vector<WorldPoint> path;
  for (int id : route.ids)
    for (const auto& l : labels)
      if (l.id == id && l.world) path.push_back(*l.world);
  TrackOptions opts;
  opts.obstacles = &obstacles_;
  const TrackResult r = pd_track(robot, path, controller_, opts);
  return !r.collided && r.min_clearance >= kDangerInflation;
}

PlanAnswer TpvOracle::plan(const RobotPose& robot, std::span<const Label> labels) const {
  std::vector<int> dangerous;
  for (const auto& l : labels)
    if (l.kind != LabelKind::RobotOrigin && l.world && obstacles_.clearance(*l.world) < kDangerInflation)
      dangerous.push_back(l.id);
  std::sort(dangerous.begin(), dangerous.end());
  PlanAnswer answer;
  answer.dangerous_ids = dangerous;

  // Candidates in order of preference: strict then narrow inflation. The
  // first that gains and tracks safely wins, then the first that tracks
  // safely, then the strict route as planned.
  Route route = search(robot, labels, grid_, field_);
  const bool strict_safe = !route.ids.empty() && tracks_safely(robot, labels, route);
  if (!strict_safe || route.gain < kOracleProgress) {
    Route narrow = search(robot, labels, narrow_grid_, narrow_field_);
    const bool narrow_safe = !narrow.ids.empty() && tracks_safely(robot, labels, narrow);
    if (narrow_safe && (narrow.gain >= kOracleProgress || !strict_safe)) route = std::move(narrow);
  }

  if (!route.ids.empty()) {
    answer.commands = route.ids;
    std::ostringstream why;
    why << "Following ";
    for (std::size_t i = 0; i < route.ids.size(); ++i) why << (i ? ", " : "") << route.ids[i];
    why << " keeps the robot on open floor and brings it closer to the red circle";
    if (!dangerous.empty()) why << "; labels next to obstacles are avoided";
    why << ".";
    answer.explanation = why.str();
    return answer;
  }

  // No safe connected label: head for the label nearest the goal, preferring safe ones.
  const Label* pick = nullptr;
  auto key = [&](const Label& l) {
    const bool unsafe = obstacles_.clearance(*l.world) < kDangerInflation;
    return std::make_tuple(unsafe, distance(*l.world, goal_), l.id);
  };
  for (const auto& l : labels) {
    if (l.kind == LabelKind::RobotOrigin || !l.world) continue;
    if (pick == nullptr || key(l) < key(*pick)) pick = &l;
  }
  if (pick == nullptr) throw Error(ErrorCode::NoCandidates, "no waypoint labels");
  answer.commands = {pick->id};
  answer.explanation = "No clear route is visible; label " + std::to_string(pick->id) +
                       " is the closest point to the red circle.";
  return answer;
}

}  // namespace s2p
