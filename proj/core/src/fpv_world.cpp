#include "s2p/fpv_world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <cstdio>
#include <queue>

#include <nlohmann/json.hpp>

#include "s2p/error.hpp"
#include "s2p/geometry.hpp"

namespace s2p {

using nlohmann::json;

std::string_view to_string(RoomType r) noexcept {
  switch (r) {
    case RoomType::Kitchen: return "kitchen";
    case RoomType::Living: return "living";
    case RoomType::Bedroom: return "bedroom";
    case RoomType::Bathroom: return "bathroom";
  }
  return "kitchen";
}

RoomType room_type_from_string(std::string_view text) {
  for (auto r : kAllRoomTypes)
    if (to_string(r) == text) return r;
  throw Error(ErrorCode::InvalidArgument, "room type '" + std::string(text) + "'");
}

std::string_view to_string(FpvEvent e) noexcept {
  switch (e) {
    case FpvEvent::Moved: return "moved";
    case FpvEvent::Rotated: return "rotated";
    case FpvEvent::Pitched: return "pitched";
    case FpvEvent::Blocked: return "blocked";
    case FpvEvent::Saturated: return "saturated";
    case FpvEvent::Success: return "success";
    case FpvEvent::Failure: return "failure";
  }
  return "moved";
}

const FpvObject* FpvScene::object_at(Cell c) const noexcept {
  for (const auto& o : objects)
    if (o.cell == c) return &o;
  return nullptr;
}

const FpvObject* FpvScene::find(std::string_view object_class) const noexcept {
  for (const auto& o : objects)
    if (o.object_class == object_class) return &o;
  return nullptr;
}

namespace {

const char* elevation_name(Elevation e) {
  switch (e) {
    case Elevation::Low: return "low";
    case Elevation::Mid: return "mid";
    case Elevation::High: return "high";
  }
  return "mid";
}

Elevation elevation_from_name(const std::string& s) {
  if (s == "low") return Elevation::Low;
  if (s == "mid") return Elevation::Mid;
  if (s == "high") return Elevation::High;
  throw Error(ErrorCode::InvalidArgument, "elevation '" + s + "'");
}

Pitch pitch_from_name(const std::string& s) {
  for (auto p : {Pitch::Up, Pitch::Level, Pitch::Down})
    if (s == to_string(p)) return p;
  throw Error(ErrorCode::InvalidArgument, "pitch '" + s + "'");
}

}  // namespace

void to_json(json& j, const FpvScene& s) {
  std::vector<std::string> rows;
  for (int y = s.height - 1; y >= 0; --y) {
    std::string row;
    for (int x = 0; x < s.width; ++x) row += s.walls[s.index({x, y})] ? '#' : '.';
    rows.push_back(std::move(row));
  }
  json objects = json::array();
  for (const auto& o : s.objects)
    objects.push_back({{"class", o.object_class},
                       {"x", o.cell.x},
                       {"y", o.cell.y},
                       {"elevation", elevation_name(o.elevation)}});
  j = json{{"width", s.width},
           {"height", s.height},
           {"rows", rows},
           {"objects", objects},
           {"agent",
            {{"x", s.agent.cell.x},
             {"y", s.agent.cell.y},
             {"heading", s.agent.heading},
             {"pitch", to_string(s.agent.pitch)}}},
           {"target", s.target},
           {"room", to_string(s.room)},
           {"room_id", s.room_id}};
}

void from_json(const json& j, FpvScene& s) {
  s.width = j.at("width").get<int>();
  s.height = j.at("height").get<int>();
  if (s.width <= 0 || s.height <= 0) throw Error(ErrorCode::InvalidArgument, "scene size");
  const auto rows = j.at("rows").get<std::vector<std::string>>();
  if (rows.size() != static_cast<std::size_t>(s.height))
    throw Error(ErrorCode::InvalidArgument, "scene rows");
  s.walls.assign(static_cast<std::size_t>(s.width) * s.height, 0);
  for (int r = 0; r < s.height; ++r) {
    if (rows[r].size() != static_cast<std::size_t>(s.width))
      throw Error(ErrorCode::InvalidArgument, "scene row " + std::to_string(r));
    for (int x = 0; x < s.width; ++x) s.walls[s.index({x, s.height - 1 - r})] = rows[r][x] == '#';
  }
  s.objects.clear();
  for (const auto& o : j.at("objects"))
    s.objects.push_back({o.at("class").get<std::string>(),
                         {o.at("x").get<int>(), o.at("y").get<int>()},
                         elevation_from_name(o.at("elevation").get<std::string>())});
  const auto& a = j.at("agent");
  s.agent = {{a.at("x").get<int>(), a.at("y").get<int>()}, a.at("heading").get<int>(),
             pitch_from_name(a.at("pitch").get<std::string>())};
  s.target = j.at("target").get<std::string>();
  s.room = room_type_from_string(j.at("room").get<std::string>());
  s.room_id = j.value("room_id", std::string());
  validate(s);
}

void validate(const FpvScene& s) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (s.width < 3 || s.height < 3) fail("scene too small");
  if (s.walls.size() != static_cast<std::size_t>(s.width) * s.height) fail("wall grid size");
  for (const auto& o : s.objects) {
    if (s.is_wall(o.cell)) fail("object " + o.object_class + " inside a wall");
    if (s.find(o.object_class) != &o) fail("duplicate object class " + o.object_class);
  }
  if (!s.is_free(s.agent.cell)) fail("agent not on a free cell");
  if (s.agent.heading < 0 || s.agent.heading >= 360 || s.agent.heading % 30 != 0) fail("agent heading");
  if (s.find(s.target) == nullptr) fail("target " + s.target + " not in scene");
}

Cell forward_offset(int heading) noexcept {
  static constexpr std::array<Cell, 8> kSteps{{{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
  const int h = ((heading % 360) + 360) % 360;
  // 0 -> E, 30/60 -> NE, 90 -> N, 120/150 -> NW, ...
  const int octant = static_cast<int>(std::lround(h / 45.0)) % 8;
  return kSteps[static_cast<std::size_t>(octant)];
}

std::optional<Cell> forward_cell(const FpvScene& scene, Cell from, int heading) noexcept {
  const Cell d = forward_offset(heading);
  const Cell to{from.x + d.x, from.y + d.y};
  if (!scene.is_free(to)) return std::nullopt;
  if (d.x != 0 && d.y != 0 &&
      (!scene.is_free({from.x + d.x, from.y}) || !scene.is_free({from.x, from.y + d.y})))
    return std::nullopt;
  return to;
}

double relative_bearing(const FpvAgent& agent, Cell to) noexcept {
  const double abs_deg = rad2deg(std::atan2(to.y - agent.cell.y, to.x - agent.cell.x));
  return wrap_degrees_180(abs_deg - agent.heading);
}

double cell_distance(Cell a, Cell b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

bool line_of_sight(const FpvScene& scene, Cell from, Cell to) noexcept {
  const double d = cell_distance(from, to);
  const int n = std::max(1, static_cast<int>(std::ceil(d / 0.05)));
  for (int i = 1; i < n; ++i) {
    const double t = static_cast<double>(i) / n;
    const Cell c{static_cast<int>(std::floor(from.x + t * (to.x - from.x) + 0.5)),
                 static_cast<int>(std::floor(from.y + t * (to.y - from.y) + 0.5))};
    if (c == from || c == to) continue;
    if (!scene.is_free(c)) return false;
  }
  return true;
}

bool pitch_permits(Pitch pitch, Elevation e, double distance) noexcept {
  if (e == Elevation::Mid) return true;
  switch (pitch) {
    case Pitch::Level: return distance >= kFpvNearBand;
    case Pitch::Down: return e == Elevation::Low;
    case Pitch::Up: return e == Elevation::High;
  }
  return false;
}

bool is_visible(const FpvScene& scene, const FpvObject& obj) noexcept {
  const double d = cell_distance(scene.agent.cell, obj.cell);
  if (d > kFpvViewRange + 1e-9) return false;
  if (std::abs(relative_bearing(scene.agent, obj.cell)) > kFpvHalfFov + 1e-9) return false;
  return pitch_permits(scene.agent.pitch, obj.elevation, d) &&
         line_of_sight(scene, scene.agent.cell, obj.cell);
}

bool in_success_region(const FpvScene& scene, Cell c) noexcept {
  const auto* t = scene.find(scene.target);
  if (t == nullptr || !scene.is_free(c)) return false;
  return cell_distance(c, t->cell) <= kFpvViewRange + 1e-9 && line_of_sight(scene, c, t->cell);
}

FpvStepResult fpv_step(const FpvScene& scene, int command) {
  const CommandMeaning m = meaning_of(command);
  FpvStepResult r{scene, FpvEvent::Moved, 0.0};
  auto& agent = r.scene.agent;
  switch (m.kind) {
    case CommandKind::Done: {
      const auto* t = scene.find(scene.target);
      r.event = t != nullptr && is_visible(scene, *t) ? FpvEvent::Success : FpvEvent::Failure;
      break;
    }
    case CommandKind::Rotate:
      agent.heading = ((agent.heading + m.rotation_degrees) % 360 + 360) % 360;
      r.event = FpvEvent::Rotated;
      break;
    case CommandKind::MoveForward: {
      const auto to = forward_cell(scene, agent.cell, agent.heading);
      if (!to) {
        r.event = FpvEvent::Blocked;
        break;
      }
      r.moved = cell_distance(agent.cell, *to);
      agent.cell = *to;
      r.event = FpvEvent::Moved;
      break;
    }
    case CommandKind::LookUp:
      if (agent.pitch == Pitch::Up) {
        r.event = FpvEvent::Saturated;
      } else {
        agent.pitch = agent.pitch == Pitch::Down ? Pitch::Level : Pitch::Up;
        r.event = FpvEvent::Pitched;
      }
      break;
    case CommandKind::LookDown:
      if (agent.pitch == Pitch::Down) {
        r.event = FpvEvent::Saturated;
      } else {
        agent.pitch = agent.pitch == Pitch::Up ? Pitch::Level : Pitch::Down;
        r.event = FpvEvent::Pitched;
      }
      break;
  }
  return r;
}

namespace {

struct RoomPalette {
  Rgb ceiling;
  Rgb wall;
  Rgb floor;
};

RoomPalette palette(RoomType r) {
  switch (r) {
    case RoomType::Kitchen: return {{236, 236, 230}, {226, 214, 170}, {176, 168, 150}};
    case RoomType::Living: return {{240, 236, 228}, {196, 210, 190}, {148, 108, 70}};
    case RoomType::Bedroom: return {{234, 232, 240}, {206, 190, 214}, {118, 120, 160}};
    case RoomType::Bathroom: return {{244, 246, 248}, {188, 216, 228}, {210, 214, 216}};
  }
  return {};
}

Rgb class_colour(std::string_view name) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : name) h = (h ^ c) * 16777619u;
  // Saturated colours away from the palette greys.
  const Rgb base[] = {{200, 40, 40}, {40, 160, 60}, {40, 70, 200}, {220, 160, 20},
                      {150, 40, 170}, {20, 170, 170}, {230, 100, 20}, {90, 60, 30}};
  Rgb c = base[h % 8];
  const int shift = static_cast<int>((h >> 8) % 41) - 20;
  auto adj = [shift](std::uint8_t v) {
    return static_cast<std::uint8_t>(std::clamp(static_cast<int>(v) + shift, 0, 255));
  };
  return {adj(c.r), adj(c.g), adj(c.b)};
}

Rgb shade(Rgb c, double f) {
  auto s = [f](std::uint8_t v) { return static_cast<std::uint8_t>(std::clamp(v * f, 0.0, 255.0)); };
  return {s(c.r), s(c.g), s(c.b)};
}

void fill_rect(Frame& f, int x0, int y0, int x1, int y1, Rgb c) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, f.width() - 1);
  y1 = std::min(y1, f.height() - 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) f.set(x, y, c);
}

int horizon_row(Pitch p, int h) {
  switch (p) {
    case Pitch::Up: return h * 3 / 4;
    case Pitch::Level: return h / 2;
    case Pitch::Down: return h / 4;
  }
  return h / 2;
}

struct Sprite {
  double distance;
  double bearing;
  Rgb colour;
  double vertical;  // -1 high, 0 mid, 1 low
  bool wall;
};

}  // namespace

FpvView fpv_render(const FpvScene& scene, std::uint64_t tick) {
  const int w = kFpvFrameWidth;
  const int h = kFpvFrameHeight;
  const auto pal = palette(scene.room);
  Frame frame(w, h, pal.ceiling, FrameSource::FpvSim, tick);
  const int horizon = horizon_row(scene.agent.pitch, h);
  fill_rect(frame, 0, horizon - h / 8, w - 1, horizon, pal.wall);
  fill_rect(frame, 0, horizon + 1, w - 1, h - 1, pal.floor);

  std::vector<Sprite> sprites;
  FpvView view;
  const Cell a = scene.agent.cell;
  const int reach = static_cast<int>(std::ceil(kFpvViewRange));
  for (int y = a.y - reach; y <= a.y + reach; ++y)
    for (int x = a.x - reach; x <= a.x + reach; ++x) {
      const Cell c{x, y};
      if (c == a || !scene.in_bounds(c) || !scene.is_wall(c)) continue;
      const double d = cell_distance(a, c);
      const double b = relative_bearing(scene.agent, c);
      if (d > kFpvViewRange + 0.5 || std::abs(b) > kFpvHalfFov + 10.0) continue;
      if (!line_of_sight(scene, a, c)) continue;
      sprites.push_back({d, b, shade(pal.wall, 0.55 + 0.1 * d), 0.0, true});
    }
  for (const auto& o : scene.objects) {
    if (!is_visible(scene, o)) continue;
    const double d = cell_distance(a, o.cell);
    const double b = relative_bearing(scene.agent, o.cell);
    const double vert = o.elevation == Elevation::Low ? 1.0 : o.elevation == Elevation::High ? -1.0 : 0.0;
    sprites.push_back({d, b, class_colour(o.object_class), vert, false});
    view.seen.push_back({o.object_class, b, d});
  }
  std::stable_sort(sprites.begin(), sprites.end(),
                   [](const Sprite& l, const Sprite& r) { return l.distance > r.distance; });
  for (const auto& s : sprites) {
    const double u = w / 2.0 - (s.bearing / kFpvHalfFov) * (w / 2.0);
    const double size = h * 0.35 / std::max(s.distance, 0.5);
    if (s.wall) {
      const int half = static_cast<int>(size * 0.7);
      fill_rect(frame, static_cast<int>(u - half), static_cast<int>(horizon - size),
                static_cast<int>(u + half), static_cast<int>(horizon + size * 0.5), s.colour);
      continue;
    }
    const double v = horizon + s.vertical * h * 0.3 / std::max(s.distance, 0.5);
    const int half = static_cast<int>(size / 2);
    const int x0 = static_cast<int>(u) - half;
    const int y0 = static_cast<int>(v) - half;
    fill_rect(frame, x0, y0, x0 + 2 * half, y0 + 2 * half, {20, 20, 20});
    fill_rect(frame, x0 + 2, y0 + 2, x0 + 2 * half - 2, y0 + 2 * half - 2, s.colour);
  }
  std::sort(view.seen.begin(), view.seen.end(), [](const auto& l, const auto& r) {
    return l.distance != r.distance ? l.distance < r.distance : l.object_class < r.object_class;
  });
  view.frame = std::move(frame);
  return view;
}

std::vector<double> distance_to_success(const FpvScene& scene) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(scene.width) * scene.height, kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  for (int y = 0; y < scene.height; ++y)
    for (int x = 0; x < scene.width; ++x)
      if (in_success_region(scene, {x, y})) {
        dist[scene.index({x, y})] = 0.0;
        open.push({0.0, scene.index({x, y})});
      }
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    if (d > dist[idx]) continue;
    const Cell c{static_cast<int>(idx % scene.width), static_cast<int>(idx / scene.width)};
    for (int heading = 0; heading < 360; heading += 45) {
      // Moves are symmetric, so the forward rule doubles as the reverse rule.
      const Cell off = forward_offset(heading);
      const Cell n{c.x + off.x, c.y + off.y};
      if (!scene.is_free(n)) continue;
      if (off.x != 0 && off.y != 0 &&
          (!scene.is_free({c.x + off.x, c.y}) || !scene.is_free({c.x, c.y + off.y})))
        continue;
      const double nd = d + ((off.x != 0 && off.y != 0) ? std::sqrt(2.0) : 1.0);
      const auto ni = scene.index(n);
      if (nd < dist[ni]) {
        dist[ni] = nd;
        open.push({nd, ni});
      }
    }
  }
  return dist;
}

double shortest_path_length(const FpvScene& scene) {
  return distance_to_success(scene)[scene.index(scene.agent.cell)];
}

const std::vector<std::string>& room_objects(RoomType room) {
  static const std::map<RoomType, std::vector<std::string>> kObjects{
      {RoomType::Kitchen,
       {"Sink", "Fridge", "Bowl", "Knife", "Cabinet", "TableTop", "Toaster", "Microwave",
        "SprayBottle", "Candle", "LightSwitch", "HousePlant"}},
      {RoomType::Living,
       {"HousePlant", "Lamp", "Book", "Chair", "Painting", "Television", "LapTop",
        "RemoteControl", "WateringCan", "TableTop", "Candle", "Watch"}},
      {RoomType::Bedroom,
       {"Bed", "Lamp", "Watch", "KeyChain", "Book", "AlarmClock", "CellPhone", "Cloth",
        "Painting", "Chair", "Mirror", "LapTop"}},
      {RoomType::Bathroom,
       {"Toilet", "Sink", "SoapBottle", "Toiletpaper", "Mirror", "Cloth", "SprayBottle",
        "Candle", "LightSwitch", "Cabinet", "HousePlant", "Painting"}},
  };
  return kObjects.at(room);
}

Elevation object_elevation(std::string_view object_class) {
  static const std::map<std::string, Elevation, std::less<>> kElevation{
      {"Bed", Elevation::Low},        {"Toilet", Elevation::Low},
      {"HousePlant", Elevation::Low}, {"WateringCan", Elevation::Low},
      {"Cloth", Elevation::Low},      {"Toiletpaper", Elevation::Low},
      {"Painting", Elevation::High},  {"Mirror", Elevation::High},
      {"LightSwitch", Elevation::High},
  };
  const auto it = kElevation.find(object_class);
  return it == kElevation.end() ? Elevation::Mid : it->second;
}

namespace {

bool free_cells_connected(const FpvScene& s) {
  std::vector<Cell> free;
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x)
      if (s.is_free({x, y})) free.push_back({x, y});
  if (free.empty()) return false;
  std::vector<std::uint8_t> seen(s.walls.size(), 0);
  std::vector<Cell> stack{free.front()};
  seen[s.index(free.front())] = 1;
  std::size_t reached = 0;
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    ++reached;
    for (const Cell d : {Cell{1, 0}, Cell{-1, 0}, Cell{0, 1}, Cell{0, -1}}) {
      const Cell n{c.x + d.x, c.y + d.y};
      if (s.is_free(n) && !seen[s.index(n)]) {
        seen[s.index(n)] = 1;
        stack.push_back(n);
      }
    }
  }
  return reached == free.size();
}

std::optional<FpvScene> try_generate(const FpvSceneSpec& spec, Rng& rng) {
  FpvScene s;
  s.room = spec.room;
  s.width = static_cast<int>(rng.uniform_int(8, 11));
  s.height = static_cast<int>(rng.uniform_int(7, 10));
  s.walls.assign(static_cast<std::size_t>(s.width) * s.height, 0);
  for (int x = 0; x < s.width; ++x) {
    s.walls[s.index({x, 0})] = 1;
    s.walls[s.index({x, s.height - 1})] = 1;
  }
  for (int y = 0; y < s.height; ++y) {
    s.walls[s.index({0, y})] = 1;
    s.walls[s.index({s.width - 1, y})] = 1;
  }
  // Optional partition wall with a two-cell doorway.
  if (rng.bernoulli(0.5)) {
    if (rng.bernoulli(0.5)) {
      const int x = static_cast<int>(rng.uniform_int(3, s.width - 4));
      const int door = static_cast<int>(rng.uniform_int(1, s.height - 3));
      for (int y = 1; y < s.height - 1; ++y)
        if (y != door && y != door + 1) s.walls[s.index({x, y})] = 1;
    } else {
      const int y = static_cast<int>(rng.uniform_int(3, s.height - 4));
      const int door = static_cast<int>(rng.uniform_int(1, s.width - 3));
      for (int x = 1; x < s.width - 1; ++x)
        if (x != door && x != door + 1) s.walls[s.index({x, y})] = 1;
    }
  }

  std::vector<std::string> pool = room_objects(spec.room);
  for (std::size_t i = pool.size(); i > 1; --i)
    std::swap(pool[i - 1], pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
  const auto n_objects = static_cast<std::size_t>(rng.uniform_int(5, 7));
  pool.resize(n_objects);
  std::string target = spec.target.value_or(pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n_objects) - 1))]);
  if (std::find(pool.begin(), pool.end(), target) == pool.end()) pool.back() = target;
  s.target = target;

  for (const auto& cls : pool) {
    bool placed = false;
    for (int attempt = 0; attempt < 50 && !placed; ++attempt) {
      const Cell c{static_cast<int>(rng.uniform_int(1, s.width - 2)),
                   static_cast<int>(rng.uniform_int(1, s.height - 2))};
      if (!s.is_free(c)) continue;
      s.objects.push_back({cls, c, object_elevation(cls)});
      if (free_cells_connected(s)) placed = true;
      else s.objects.pop_back();
    }
    if (!placed) return std::nullopt;
  }

  const auto dist = distance_to_success(s);
  std::vector<Cell> starts;
  for (int y = 1; y < s.height - 1; ++y)
    for (int x = 1; x < s.width - 1; ++x) {
      const double d = dist[s.index({x, y})];
      if (s.is_free({x, y}) && d >= spec.min_start_distance && d <= spec.max_start_distance)
        starts.push_back({x, y});
    }
  if (starts.empty()) return std::nullopt;
  for (int attempt = 0; attempt < 20; ++attempt) {
    s.agent.cell = starts[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(starts.size()) - 1))];
    s.agent.heading = static_cast<int>(rng.uniform_int(0, 11)) * 30;
    s.agent.pitch = Pitch::Level;
    if (!is_visible(s, *s.find(s.target))) return s;
  }
  return std::nullopt;
}

}  // namespace

FpvScene generate_fpv_scene(const FpvSceneSpec& spec, Rng& rng) {
  const std::uint64_t id = rng.next();
  for (int attempt = 0; attempt < 200; ++attempt) {
    if (auto s = try_generate(spec, rng)) {
      char buf[24];
      std::snprintf(buf, sizeof buf, "-%08llx", static_cast<unsigned long long>(id & 0xffffffffu));
      s->room_id = std::string(to_string(spec.room)) + buf;
      validate(*s);
      return *s;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "could not generate a scene for " + std::string(to_string(spec.room)));
}

}  // namespace s2p
