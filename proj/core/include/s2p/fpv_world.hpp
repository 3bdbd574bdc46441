#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "s2p/episodic.hpp"
#include "s2p/rng.hpp"
#include "s2p/types.hpp"

namespace s2p {

enum class RoomType { Kitchen, Living, Bedroom, Bathroom };

std::string_view to_string(RoomType r) noexcept;
RoomType room_type_from_string(std::string_view text);
inline constexpr RoomType kAllRoomTypes[] = {RoomType::Kitchen, RoomType::Living, RoomType::Bedroom,
                                             RoomType::Bathroom};

/// Height band of an object. At level pitch, low and high objects are only
/// in view from 1.5 cells away; looking down reveals low objects up close,
/// looking up reveals high ones.
enum class Elevation { Low, Mid, High };

struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

struct FpvObject {
  std::string object_class;
  Cell cell;
  Elevation elevation = Elevation::Mid;
  bool operator==(const FpvObject&) const = default;
};

struct FpvAgent {
  Cell cell;
  int heading = 0;  // degrees, multiple of 30 in [0, 360); 0 = +x, counter-clockwise positive
  Pitch pitch = Pitch::Level;
  bool operator==(const FpvAgent&) const = default;
};

inline constexpr double kFpvViewRange = 3.0;     // cells
inline constexpr double kFpvHalfFov = 45.0;      // degrees
inline constexpr double kFpvNearBand = 1.5;      // cells, see Elevation

/// Grid world for object-goal navigation. Cell (x, y) is free when not a
/// wall and not occupied by an object; the outer ring is always wall.
struct FpvScene {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> walls;  // row-major, 1 = wall
  std::vector<FpvObject> objects;   // each class appears once
  FpvAgent agent;
  std::string target;
  RoomType room = RoomType::Kitchen;
  std::string room_id;

  bool in_bounds(Cell c) const noexcept { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  bool is_wall(Cell c) const noexcept { return !in_bounds(c) || walls[index(c)] != 0; }
  const FpvObject* object_at(Cell c) const noexcept;
  const FpvObject* find(std::string_view object_class) const noexcept;
  bool is_free(Cell c) const noexcept { return !is_wall(c) && object_at(c) == nullptr; }
  std::size_t index(Cell c) const noexcept { return static_cast<std::size_t>(c.y) * width + c.x; }
  bool operator==(const FpvScene&) const = default;
};

void to_json(nlohmann::json& j, const FpvScene& s);
void from_json(const nlohmann::json& j, FpvScene& s);

/// Throws InvalidArgument on a broken scene invariant.
void validate(const FpvScene& scene);

/// Unit step for a heading: the 8-neighbour closest to it (30 and 60 both
/// map to the 45-degree diagonal).
Cell forward_offset(int heading) noexcept;
/// Target cell of a forward move, or nullopt when the move is illegal
/// (occupied target, or a diagonal move clipping an occupied corner).
std::optional<Cell> forward_cell(const FpvScene& scene, Cell from, int heading) noexcept;

/// Bearing of `to` seen from the agent, degrees in (-180, 180], left positive.
double relative_bearing(const FpvAgent& agent, Cell to) noexcept;
double cell_distance(Cell a, Cell b) noexcept;
/// Unobstructed sight line between cell centres (endpoints excluded).
bool line_of_sight(const FpvScene& scene, Cell from, Cell to) noexcept;
bool pitch_permits(Pitch pitch, Elevation e, double distance) noexcept;
/// In the field of view, within range, in sight and not cut off by pitch.
bool is_visible(const FpvScene& scene, const FpvObject& obj) noexcept;
/// Range and sight line only: a cell from which the target can be reported
/// after turning to face it.
bool in_success_region(const FpvScene& scene, Cell c) noexcept;

enum class FpvEvent { Moved, Rotated, Pitched, Blocked, Saturated, Success, Failure };
std::string_view to_string(FpvEvent e) noexcept;

struct FpvStepResult {
  FpvScene scene;
  FpvEvent event = FpvEvent::Moved;
  double moved = 0.0;  // cells travelled
};

/// Executes one command. Illegal moves report Blocked and leave the scene
/// unchanged; DONE reports Success when the target is visible.
FpvStepResult fpv_step(const FpvScene& scene, int command);

struct SeenObjectTruth {
  std::string object_class;
  double bearing = 0.0;   // degrees, left positive
  double distance = 0.0;  // cells
  bool operator==(const SeenObjectTruth&) const = default;
};

struct FpvView {
  Frame frame;
  std::vector<SeenObjectTruth> seen;  // visible objects, nearest first
};

inline constexpr int kFpvFrameWidth = 320;
inline constexpr int kFpvFrameHeight = 240;

/// Schematic first-person raster: wall, floor and ceiling bands coloured by
/// room type, one icon per visible object placed by bearing and distance.
FpvView fpv_render(const FpvScene& scene, std::uint64_t tick = 0);

/// Geodesic distance (8-connected, diagonal cost sqrt 2, no corner cutting)
/// from every cell to the nearest success-region cell; +inf when unreachable.
std::vector<double> distance_to_success(const FpvScene& scene);
double shortest_path_length(const FpvScene& scene);

/// Object classes used by the generator, per room archetype.
const std::vector<std::string>& room_objects(RoomType room);
Elevation object_elevation(std::string_view object_class);

struct FpvSceneSpec {
  RoomType room = RoomType::Kitchen;
  std::optional<std::string> target;  // drawn from the room's objects when unset
  double min_start_distance = 2.0;
  double max_start_distance = 9.0;
};

/// Seeded room: walls, 5 to 7 objects, agent placed with the target out of
/// view and reachable.
FpvScene generate_fpv_scene(const FpvSceneSpec& spec, Rng& rng);

}  // namespace s2p
