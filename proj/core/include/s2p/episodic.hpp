#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace s2p {

/// Object classes and where they were last seen, as bearings in degrees
/// [0, 360) relative to the agent (0 = straight ahead, counter-clockwise
/// positive). Rotating the agent rotates every stored bearing.
struct Compass {
  std::map<std::string, double> entries;
  double heading = 0.0;  // accumulated agent heading, degrees [0, 360)
  bool operator==(const Compass&) const = default;
};

enum class Pitch { Up, Level, Down };

const char* to_string(Pitch p) noexcept;

struct EpisodicState {
  Compass compass;
  std::optional<int> last_action;
  Pitch pitch = Pitch::Level;
  std::vector<int> history;
  std::optional<int> planned_next;
  bool operator==(const EpisodicState&) const = default;
};

struct SeenObject {
  std::string object_class;
  double bearing_offset = 0.0;  // degrees relative to the camera axis, left positive
};

/// Records objects at their current relative bearing; re-seen classes are
/// overwritten.
EpisodicState observe(EpisodicState state, std::span<const SeenObject> objects);

/// Turns the agent by `delta_degrees` (left positive): heading += delta and
/// every stored bearing shifts by -delta.
EpisodicState rotate(EpisodicState state, double delta_degrees);

/// Appends an executed command to the history and sets it as last action.
EpisodicState record_action(EpisodicState state, int code, std::optional<int> planned_next,
                            std::size_t max_history);

/// Deterministic text summary for the prompt: compass entries by ascending
/// bearing, last action, view pitch, command history and the planned next
/// command.
std::string to_prompt_text(const EpisodicState& state);

}  // namespace s2p
