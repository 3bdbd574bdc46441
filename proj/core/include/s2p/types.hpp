#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace s2p {

enum class Setup { Fpv, Tpv };
enum class FrameSource { FpvSim, TpvSim, File };

std::string_view to_string(Setup setup) noexcept;
Setup setup_from_string(std::string_view text);

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

/// An 8-bit RGB raster. Row-major, three bytes per pixel, no padding.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, Rgb fill = {}, FrameSource source = FrameSource::File,
        std::uint64_t timestamp = 0);
  Frame(int width, int height, std::vector<std::uint8_t> data,
        FrameSource source = FrameSource::File, std::uint64_t timestamp = 0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return width_ == 0 || height_ == 0; }
  std::span<const std::uint8_t> data() const noexcept { return data_; }
  FrameSource source() const noexcept { return source_; }
  std::uint64_t timestamp() const noexcept { return timestamp_; }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  Rgb at(int x, int y) const noexcept {
    const auto* p = &data_[(static_cast<std::size_t>(y) * width_ + x) * 3];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) noexcept {
    auto* p = &data_[(static_cast<std::size_t>(y) * width_ + x) * 3];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  /// Writes only when (x, y) is inside the raster.
  void blend_set(int x, int y, Rgb c) noexcept {
    if (contains(x, y)) set(x, y, c);
  }

  bool operator==(const Frame&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
  FrameSource source_ = FrameSource::File;
  std::uint64_t timestamp_ = 0;
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
  auto operator<=>(const PixelPoint&) const = default;
};

struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
  auto operator<=>(const WorldPoint&) const = default;
};

struct PixelRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  bool operator==(const PixelRect&) const = default;
};

enum class LabelKind { RobotOrigin, Waypoint, ActionOverlay };

struct Label {
  int id = 0;
  PixelPoint pos;
  std::optional<WorldPoint> world;
  LabelKind kind = LabelKind::Waypoint;
  bool traversable = true;
  bool dangerous = false;
  bool operator==(const Label&) const = default;
};

enum class GoalKind { RedCircle, TargetObject };

struct GoalMarker {
  GoalKind kind = GoalKind::RedCircle;
  PixelPoint pos;            // RedCircle
  std::string object_class;  // TargetObject
  double radius = 0.0;       // pixels, RedCircle
  bool operator==(const GoalMarker&) const = default;
};

struct AnnotatedFrame {
  Frame base;
  std::vector<Label> labels;
  std::optional<GoalMarker> goal;
  Setup setup = Setup::Tpv;
  std::optional<PixelRect> crop;

  const Label* find(int id) const noexcept;
  /// Every id a model answer may reference: 0..9 for FPV, label ids for TPV.
  std::vector<int> valid_ids() const;
  bool operator==(const AnnotatedFrame&) const = default;
};

/// Throws InvalidArgument describing the first broken invariant.
void validate(const AnnotatedFrame& af);

// FPV command table. Codes 1..7 form the on-screen semicircle, 4 being
// straight ahead; positive rotation turns the agent left.
enum class CommandKind { Done, Rotate, MoveForward, LookUp, LookDown };

struct CommandMeaning {
  CommandKind kind = CommandKind::Done;
  int rotation_degrees = 0;  // non-zero only for Rotate
  bool operator==(const CommandMeaning&) const = default;
};

inline constexpr int kMinCommand = 0;
inline constexpr int kMaxCommand = 9;

CommandMeaning meaning_of(int code);
int code_of(CommandMeaning meaning);
std::string describe_command(int code);
/// Command code for an in-place rotation of `degrees`; throws for angles
/// outside the command table.
int rotation_code(int degrees);

struct PlanAnswer {
  std::vector<int> commands;
  std::string explanation;
  std::optional<std::vector<std::string>> objects_seen;
  std::optional<std::vector<int>> dangerous_ids;
  bool operator==(const PlanAnswer&) const = default;
};

void to_json(nlohmann::json& j, const PlanAnswer& a);
void from_json(const nlohmann::json& j, PlanAnswer& a);
void to_json(nlohmann::json& j, const Label& l);
void to_json(nlohmann::json& j, const PixelPoint& p);
void to_json(nlohmann::json& j, const WorldPoint& p);

}  // namespace s2p
