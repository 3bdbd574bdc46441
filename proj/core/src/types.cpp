#include "s2p/types.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "s2p/error.hpp"

namespace s2p {

std::string_view to_string(Setup setup) noexcept {
  return setup == Setup::Fpv ? "fpv" : "tpv";
}

Setup setup_from_string(std::string_view text) {
  if (text == "fpv" || text == "FPV") return Setup::Fpv;
  if (text == "tpv" || text == "TPV") return Setup::Tpv;
  throw Error(ErrorCode::InvalidArgument, "setup '" + std::string(text) + "'");
}

Frame::Frame(int width, int height, Rgb fill, FrameSource source, std::uint64_t timestamp)
    : width_(width), height_(height), source_(source), timestamp_(timestamp) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "frame dimensions");
  data_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

Frame::Frame(int width, int height, std::vector<std::uint8_t> data, FrameSource source,
             std::uint64_t timestamp)
    : width_(width), height_(height), data_(std::move(data)), source_(source),
      timestamp_(timestamp) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "frame dimensions");
  if (data_.size() != static_cast<std::size_t>(width) * height * 3)
    throw Error(ErrorCode::InvalidArgument, "frame data length");
}

const Label* AnnotatedFrame::find(int id) const noexcept {
  auto it = std::find_if(labels.begin(), labels.end(), [id](const Label& l) { return l.id == id; });
  return it == labels.end() ? nullptr : &*it;
}

std::vector<int> AnnotatedFrame::valid_ids() const {
  std::vector<int> ids;
  if (setup == Setup::Fpv) {
    for (int c = kMinCommand; c <= kMaxCommand; ++c) ids.push_back(c);
  } else {
    for (const auto& l : labels) ids.push_back(l.id);
    std::sort(ids.begin(), ids.end());
  }
  return ids;
}

void validate(const AnnotatedFrame& af) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  std::set<int> seen;
  for (const auto& l : af.labels) {
    if (l.id < 0 || l.id > 99) fail("label id out of range: " + std::to_string(l.id));
    if (!seen.insert(l.id).second) fail("duplicate label id " + std::to_string(l.id));
    if (l.pos.u < 0 || l.pos.v < 0 || l.pos.u >= af.base.width() || l.pos.v >= af.base.height())
      fail("label " + std::to_string(l.id) + " outside frame");
    if (l.kind == LabelKind::RobotOrigin && l.id != 0) fail("robot origin must carry id 0");
  }
  if (af.setup == Setup::Fpv) {
    if (af.labels.size() != 7) fail("fpv frame must carry labels 1..7");
    for (int id = 1; id <= 7; ++id)
      if (!seen.count(id)) fail("fpv frame missing label " + std::to_string(id));
  } else {
    auto origins = std::count_if(af.labels.begin(), af.labels.end(),
                                 [](const Label& l) { return l.kind == LabelKind::RobotOrigin; });
    if (origins != 1) fail("tpv frame must carry exactly one robot origin");
  }
}

namespace {

struct CommandEntry {
  int code;
  CommandMeaning meaning;
  const char* name;
};

constexpr CommandEntry kCommandTable[] = {
    {0, {CommandKind::Done, 0}, "DONE"},
    {1, {CommandKind::Rotate, 90}, "ROTATE +90"},
    {2, {CommandKind::Rotate, 60}, "ROTATE +60"},
    {3, {CommandKind::Rotate, 30}, "ROTATE +30"},
    {4, {CommandKind::MoveForward, 0}, "MOVE_FORWARD"},
    {5, {CommandKind::Rotate, -30}, "ROTATE -30"},
    {6, {CommandKind::Rotate, -60}, "ROTATE -60"},
    {7, {CommandKind::Rotate, -90}, "ROTATE -90"},
    {8, {CommandKind::LookUp, 0}, "LOOK_UP"},
    {9, {CommandKind::LookDown, 0}, "LOOK_DOWN"},
};

}  // namespace

CommandMeaning meaning_of(int code) {
  if (code < kMinCommand || code > kMaxCommand)
    throw Error(ErrorCode::UnknownLabel, std::to_string(code));
  return kCommandTable[code].meaning;
}

int code_of(CommandMeaning meaning) {
  for (const auto& e : kCommandTable)
    if (e.meaning == meaning) return e.code;
  throw Error(ErrorCode::InvalidArgument, "no command for meaning");
}

std::string describe_command(int code) {
  if (code < kMinCommand || code > kMaxCommand) return "UNKNOWN";
  return kCommandTable[code].name;
}

int rotation_code(int degrees) { return code_of({CommandKind::Rotate, degrees}); }

void to_json(nlohmann::json& j, const PlanAnswer& a) {
  j = nlohmann::json{{"commands", a.commands}, {"explanation", a.explanation}};
  if (a.objects_seen) j["objects"] = *a.objects_seen;
  if (a.dangerous_ids) j["dangerous"] = *a.dangerous_ids;
}

void from_json(const nlohmann::json& j, PlanAnswer& a) {
  a.commands = j.at("commands").get<std::vector<int>>();
  a.explanation = j.at("explanation").get<std::string>();
  a.objects_seen.reset();
  a.dangerous_ids.reset();
  if (j.contains("objects")) a.objects_seen = j.at("objects").get<std::vector<std::string>>();
  if (j.contains("dangerous")) a.dangerous_ids = j.at("dangerous").get<std::vector<int>>();
}

void to_json(nlohmann::json& j, const PixelPoint& p) { j = nlohmann::json{{"u", p.u}, {"v", p.v}}; }

void to_json(nlohmann::json& j, const WorldPoint& p) { j = nlohmann::json{{"x", p.x}, {"y", p.y}}; }

void to_json(nlohmann::json& j, const Label& l) {
  j = nlohmann::json{{"id", l.id}, {"u", l.pos.u}, {"v", l.pos.v}};
  if (l.world) j["world"] = *l.world;
}

}  // namespace s2p
