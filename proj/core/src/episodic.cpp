#include "s2p/episodic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "s2p/geometry.hpp"
#include "s2p/types.hpp"

namespace s2p {

const char* to_string(Pitch p) noexcept {
  switch (p) {
    case Pitch::Up: return "UP";
    case Pitch::Level: return "LEVEL";
    case Pitch::Down: return "DOWN";
  }
  return "LEVEL";
}

EpisodicState observe(EpisodicState state, std::span<const SeenObject> objects) {
  for (const auto& o : objects) state.compass.entries[o.object_class] = wrap_degrees_360(o.bearing_offset);
  return state;
}

EpisodicState rotate(EpisodicState state, double delta_degrees) {
  state.compass.heading = wrap_degrees_360(state.compass.heading + delta_degrees);
  for (auto& [_, bearing] : state.compass.entries) bearing = wrap_degrees_360(bearing - delta_degrees);
  return state;
}

EpisodicState record_action(EpisodicState state, int code, std::optional<int> planned_next,
                            std::size_t max_history) {
  state.last_action = code;
  state.planned_next = planned_next;
  state.history.push_back(code);
  if (state.history.size() > max_history)
    state.history.erase(state.history.begin(),
                        state.history.begin() + static_cast<std::ptrdiff_t>(state.history.size() - max_history));
  return state;
}

namespace {

std::string format_bearing(double deg) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(0);
  os << deg;
  return os.str();
}

}  // namespace

std::string to_prompt_text(const EpisodicState& state) {
  std::ostringstream os;
  if (state.compass.entries.empty()) {
    os << "Compass: no objects recorded\n";
  } else {
    std::vector<std::pair<double, std::string>> sorted;
    for (const auto& [name, bearing] : state.compass.entries) sorted.emplace_back(bearing, name);
    std::sort(sorted.begin(), sorted.end());
    os << "Compass (degrees from straight ahead, counter-clockwise):\n";
    for (const auto& [bearing, name] : sorted) os << "  - " << name << " at " << format_bearing(bearing) << "\n";
  }
  os << "Last action: ";
  if (state.last_action)
    os << *state.last_action << " (" << describe_command(*state.last_action) << ")\n";
  else
    os << "none\n";
  os << "View pitch: " << to_string(state.pitch) << "\n";
  os << "Previous commands: [";
  for (std::size_t i = 0; i < state.history.size(); ++i) os << (i ? ", " : "") << state.history[i];
  os << "]\n";
  os << "Planned next action: ";
  if (state.planned_next)
    os << *state.planned_next << " (" << describe_command(*state.planned_next) << ")\n";
  else
    os << "none\n";
  return os.str();
}

}  // namespace s2p
