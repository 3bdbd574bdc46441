#include "s2p/prompt.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "s2p/annotator.hpp"
#include "s2p/error.hpp"
#include "s2p/image_io.hpp"
#include "s2p/util.hpp"

namespace s2p {

using nlohmann::json;

const char* to_string(Role r) noexcept { return r == Role::User ? "user" : "model"; }

ImageRef ImageRef::in_memory(Frame frame) {
  ImageRef ref;
  ref.frame_ = std::make_shared<const Frame>(std::move(frame));
  return ref;
}

ImageRef ImageRef::file(std::filesystem::path path) {
  ImageRef ref;
  ref.path_ = std::move(path);
  return ref;
}

Frame ImageRef::load() const { return frame_ ? *frame_ : read_png(path_); }

std::vector<std::uint8_t> ImageRef::png() const {
  return frame_ ? encode_png(*frame_) : read_file(path_);
}

std::string ImageRef::fingerprint() const {
  if (!frame_) return sha256_hex(read_file(path_));
  Sha256 h;
  h.update(std::to_string(frame_->width()) + "x" + std::to_string(frame_->height()));
  h.update(frame_->data());
  return h.hex_digest();
}

void validate(const Conversation& conv) {
  if (conv.turns.empty()) throw Error(ErrorCode::InvalidArgument, "empty conversation");
  for (std::size_t i = 0; i < conv.turns.size(); ++i) {
    const auto& t = conv.turns[i];
    const Role expected = i % 2 == 0 ? Role::User : Role::Model;
    if (t.role != expected)
      throw Error(ErrorCode::InvalidArgument, "turn " + std::to_string(i) + " breaks alternation");
    if (t.role == Role::Model && !t.images.empty())
      throw Error(ErrorCode::InvalidArgument, "model turn " + std::to_string(i) + " carries images");
  }
  if (conv.turns.back().role != Role::User)
    throw Error(ErrorCode::InvalidArgument, "last turn must be a user turn");
}

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {}

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path) {
  return PromptTemplate(read_text_file(path));
}

std::vector<std::string> PromptTemplate::placeholders() const {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = text_.find("{{", pos)) != std::string::npos) {
    const auto end = text_.find("}}", pos + 2);
    if (end == std::string::npos) break;
    std::string name = text_.substr(pos + 2, end - pos - 2);
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(std::move(name));
    pos = end + 2;
  }
  return names;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
  std::string out;
  out.reserve(text_.size() + 256);
  std::size_t pos = 0;
  while (true) {
    const auto open = text_.find("{{", pos);
    if (open == std::string::npos) break;
    const auto close = text_.find("}}", open + 2);
    if (close == std::string::npos) break;
    const std::string name = text_.substr(open + 2, close - open - 2);
    const auto it = values.find(name);
    if (it == values.end()) throw Error(ErrorCode::TemplatePlaceholder, name);
    out.append(text_, pos, open - pos);
    out += it->second;
    pos = close + 2;
  }
  out.append(text_, pos, std::string::npos);
  return out;
}

namespace {

// Keep in sync with core/templates/*.txt (checked by the prompt tests).
constexpr const char* kFpvTemplate =
    R"(You steer a mobile robot through a house using its onboard camera.
{{TASK}}

The numbers 1 to 7 on the semicircle at the bottom of the image are steering commands.
4 moves one step forward. 3, 2 and 1 turn left in place by 30, 60 and 90 degrees.
5, 6 and 7 turn right in place by 30, 60 and 90 degrees.
Three commands are not drawn: 8 tilts the camera up, 9 tilts it down, and 0 ends the
search once the target is close and in view.

What you remember from this episode:
{{EPISODIC}}

Plan a sequence of actions: the command to execute now and the one you expect to issue next.
{{FORMAT}}
)";

constexpr const char* kTpvTemplate =
    R"(You guide a ground robot seen from a fixed camera mounted in the room.
{{TASK}}

The robot stands on label 0. Every other number marks a floor position the robot can drive to.
Choose a sequence of up to 4 labels, ordered from the robot towards the goal, that keeps the
robot clear of furniture and other obstacles.
{{FORMAT}}
)";

constexpr const char* kFpvFormat =
    R"(Use a JSON format for the reply, with no other text: {"commands": [<current>, <next>], "explanation": "<reasoning>", "objects": ["<object classes visible in the image>"]})";

constexpr const char* kTpvFormat =
    R"(Use a JSON format for the reply, with no other text: {"commands": [<label ids in order>], "explanation": "<reasoning>", "dangerous": [<label ids lying on obstacles>]})";

std::string task_text(const TaskSpec& task) {
  if (task.setup == Setup::Fpv) return "Find the " + task.target + ".";
  if (task.target.empty()) return "Drive the robot to the red circle.";
  return "Drive the robot to " + task.target + ".";
}

}  // namespace

const PromptTemplates& PromptTemplates::defaults() {
  static const PromptTemplates kDefaults{PromptTemplate(kFpvTemplate), PromptTemplate(kTpvTemplate)};
  return kDefaults;
}

PromptTemplates PromptTemplates::load_dir(const std::filesystem::path& dir) {
  return PromptTemplates{PromptTemplate::from_file(dir / "fpv_query.txt"),
                         PromptTemplate::from_file(dir / "tpv_query.txt")};
}

std::string live_query_text(const AnnotatedFrame& live, const std::optional<std::string>& episodic,
                            const TaskSpec& task, const PromptTemplates& templates) {
  if (task.setup != live.setup) throw Error(ErrorCode::SetupMismatch, "task");
  std::map<std::string, std::string> values{
      {"TASK", task_text(task)},
      {"FORMAT", live.setup == Setup::Fpv ? kFpvFormat : kTpvFormat},
  };
  if (live.setup == Setup::Fpv) {
    values["EPISODIC"] = episodic ? *episodic : std::string("Nothing recorded yet.");
    return templates.fpv.render(values);
  }
  values["EPISODIC"] = episodic.value_or("");
  return templates.tpv.render(values);
}

Conversation build_conversation(std::span<const ExperienceSample> context,
                                const std::filesystem::path& memory_root, const AnnotatedFrame& live,
                                const std::optional<std::string>& episodic, const TaskSpec& task,
                                const PromptTemplates& templates) {
  Conversation conv;
  conv.setup = live.setup;
  conv.valid_ids = live.valid_ids();
  conv.live_labels = live.labels;
  conv.turns.reserve(2 * context.size() + 1);
  for (const auto& s : context) {
    if (s.setup != live.setup) throw Error(ErrorCode::SetupMismatch, s.id);
    conv.turns.push_back({Role::User, s.prompt, {ImageRef::file(memory_root / s.frame_ref)}});
    conv.turns.push_back({Role::Model, serialize_answer(s.answer), {}});
  }
  conv.turns.push_back(
      {Role::User, live_query_text(live, episodic, task, templates), {ImageRef::in_memory(draw(live))}});
  return conv;
}

void append_reprompt(Conversation& conv, const std::string& raw_answer, const std::string& problem) {
  conv.turns.push_back({Role::Model, raw_answer, {}});
  conv.turns.push_back(
      {Role::User,
       "The previous reply could not be used (" + problem +
           "). Answer again with a single JSON object that follows the requested format.",
       {}});
}

std::string serialize_answer(const PlanAnswer& answer) { return json(answer).dump(); }

namespace {

// End offset (one past '}') of the balanced object opening at `open`, or npos.
std::size_t balanced_end(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

json first_object(std::string_view raw) {
  for (std::size_t pos = raw.find('{'); pos != std::string_view::npos; pos = raw.find('{', pos + 1)) {
    const auto end = balanced_end(raw, pos);
    if (end == std::string_view::npos) continue;
    auto j = json::parse(raw.substr(pos, end - pos), nullptr, false);
    if (!j.is_discarded() && j.is_object()) return j;
  }
  throw Error(ErrorCode::NoJsonFound, "");
}

std::vector<int> int_array(const json& j, const char* field) {
  if (!j.is_array()) throw Error(ErrorCode::SchemaViolation, field);
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw Error(ErrorCode::SchemaViolation, field);
    const auto n = v.get<std::int64_t>();
    if (n < INT32_MIN || n > INT32_MAX) throw Error(ErrorCode::SchemaViolation, field);
    out.push_back(static_cast<int>(n));
  }
  return out;
}

}  // namespace

PlanAnswer parse_answer(std::string_view raw, Setup setup, std::span<const int> valid_ids) {
  const json j = first_object(raw);
  PlanAnswer a;
  if (!j.contains("commands")) throw Error(ErrorCode::SchemaViolation, "commands");
  a.commands = int_array(j["commands"], "commands");
  if (!j.contains("explanation") || !j["explanation"].is_string())
    throw Error(ErrorCode::SchemaViolation, "explanation");
  a.explanation = j["explanation"].get<std::string>();
  if (j.contains("objects")) {
    const auto& o = j["objects"];
    if (!o.is_array()) throw Error(ErrorCode::SchemaViolation, "objects");
    std::vector<std::string> objects;
    for (const auto& v : o) {
      if (!v.is_string()) throw Error(ErrorCode::SchemaViolation, "objects");
      objects.push_back(v.get<std::string>());
    }
    a.objects_seen = std::move(objects);
  }
  if (j.contains("dangerous")) a.dangerous_ids = int_array(j["dangerous"], "dangerous");

  if (setup == Setup::Fpv) {
    if (a.commands.size() != kFpvSequence) throw Error(ErrorCode::SchemaViolation, "commands");
  } else {
    if (a.commands.empty()) throw Error(ErrorCode::SchemaViolation, "commands");
    if (a.commands.size() > kMaxTpvSequence) a.commands.resize(kMaxTpvSequence);
  }
  const std::set<int> valid(valid_ids.begin(), valid_ids.end());
  for (int id : a.commands)
    if (!valid.count(id)) throw Error(ErrorCode::UnknownLabel, std::to_string(id));
  if (a.dangerous_ids)
    for (int id : *a.dangerous_ids)
      if (!valid.count(id)) throw Error(ErrorCode::UnknownLabel, std::to_string(id));
  return a;
}

PlanAnswer parse_answer(std::string_view raw, const AnnotatedFrame& af) {
  const auto ids = af.valid_ids();
  return parse_answer(raw, af.setup, ids);
}

}  // namespace s2p
