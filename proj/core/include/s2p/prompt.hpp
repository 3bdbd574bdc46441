#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "s2p/memory_store.hpp"
#include "s2p/types.hpp"

namespace s2p {

enum class Role { User, Model };

const char* to_string(Role r) noexcept;

/// An image attached to a chat turn, either held in memory or stored as a
/// PNG file (context samples are read from the experiential memory lazily).
class ImageRef {
 public:
  static ImageRef in_memory(Frame frame);
  static ImageRef file(std::filesystem::path path);

  bool is_file() const noexcept { return !frame_; }
  const std::filesystem::path& path() const noexcept { return path_; }
  Frame load() const;
  std::vector<std::uint8_t> png() const;
  /// SHA-256 over the raw pixels and dimensions for in-memory frames, over
  /// the file bytes for stored PNGs.
  std::string fingerprint() const;

 private:
  std::shared_ptr<const Frame> frame_;
  std::filesystem::path path_;
};

struct ChatTurn {
  Role role = Role::User;
  std::string text;
  std::vector<ImageRef> images;  // user turns only
};

struct Conversation {
  std::vector<ChatTurn> turns;
  Setup setup = Setup::Tpv;
  /// Ids the live query accepts, and the live labels they refer to.
  std::vector<int> valid_ids;
  std::vector<Label> live_labels;
};

/// Throws InvalidArgument unless turns alternate user/model starting and
/// ending with a user turn, and model turns carry no images.
void validate(const Conversation& conv);

struct TaskSpec {
  Setup setup = Setup::Tpv;
  /// Target object class (FPV) or goal description (TPV).
  std::string target;
};

/// Text with {{NAME}} placeholders.
class PromptTemplate {
 public:
  explicit PromptTemplate(std::string text);
  static PromptTemplate from_file(const std::filesystem::path& path);

  const std::string& text() const noexcept { return text_; }
  /// Distinct placeholder names in order of first appearance.
  std::vector<std::string> placeholders() const;
  /// Throws TemplatePlaceholder for a placeholder missing from `values`.
  std::string render(const std::map<std::string, std::string>& values) const;

 private:
  std::string text_;
};

struct PromptTemplates {
  PromptTemplate fpv;
  PromptTemplate tpv;

  static const PromptTemplates& defaults();
  /// Reads fpv_query.txt and tpv_query.txt from `dir`.
  static PromptTemplates load_dir(const std::filesystem::path& dir);
};

/// Text of the live query turn (also stored as the prompt of recorded
/// demonstrations).
std::string live_query_text(const AnnotatedFrame& live, const std::optional<std::string>& episodic,
                            const TaskSpec& task, const PromptTemplates& templates = PromptTemplates::defaults());

/// History-injection conversation: one user turn (image + prompt) and one
/// model turn (recorded answer) per context sample, then the live query.
Conversation build_conversation(std::span<const ExperienceSample> context,
                                const std::filesystem::path& memory_root, const AnnotatedFrame& live,
                                const std::optional<std::string>& episodic, const TaskSpec& task,
                                const PromptTemplates& templates = PromptTemplates::defaults());

/// Appends the failed answer and a corrective user turn.
void append_reprompt(Conversation& conv, const std::string& raw_answer, const std::string& problem);

std::string serialize_answer(const PlanAnswer& answer);

inline constexpr std::size_t kMaxTpvSequence = 4;
inline constexpr std::size_t kFpvSequence = 2;

/// Extracts the first JSON object from `raw` (prose and code fences allowed
/// around it) and validates it against the answer schema and the ids of
/// `af`. FPV answers carry exactly two commands; TPV sequences are cut to
/// four. Throws NoJsonFound, SchemaViolation(field) or UnknownLabel(id).
PlanAnswer parse_answer(std::string_view raw, const AnnotatedFrame& af);
/// Same checks against a conversation's live query.
PlanAnswer parse_answer(std::string_view raw, Setup setup, std::span<const int> valid_ids);

}  // namespace s2p
