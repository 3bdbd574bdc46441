#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "s2p/config.hpp"
#include "s2p/geometry.hpp"
#include "s2p/types.hpp"

namespace s2p {

/// Binary floor segmentation captured once at setup (1 = traversable).
struct FloorMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  FloorMask() = default;
  FloorMask(int w, int h, bool fill = true);

  bool traversable(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width && y < height && bits[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool floor) { bits[static_cast<std::size_t>(y) * width + x] = floor ? 1 : 0; }
  /// True when every pixel within `radius` of (x, y) is floor.
  bool clear_disk(int x, int y, double radius) const noexcept;

  /// 1-bit or 8-bit PNG; any non-zero sample is floor.
  static FloorMask from_png(const std::filesystem::path& path);
  void write_png(const std::filesystem::path& path) const;
};

inline constexpr int kMinFpvFrameSize = 200;

/// Places the seven FPV action labels on a lower semicircle: radius
/// 0.35 * min(w, h), centred at the bottom middle, label 1 at the left end,
/// 4 at the apex, 7 at the right end.
AnnotatedFrame fpv_overlay(const Frame& frame);

/// Robot origin (id 0) plus ring points around it. Rings have radius i * dr
/// on the ground plane with round(2 pi r / arc) evenly spaced points each,
/// projected through `ground_to_image`; a point is kept only when its whole
/// safety disk is floor. Ids 1..N follow generation order.
std::vector<Label> tpv_keypoints(PixelPoint robot_px, const FloorMask& mask, const RingSpec& spec,
                                 const Homography& ground_to_image);

inline constexpr double kDangerInflation = 0.2;  // meters

/// Flags labels whose ground position lies within `inflation` of an obstacle
/// or wall. Labels without ground coordinates are returned unchanged.
std::vector<Label> mark_dangerous(std::vector<Label> labels, const ObstacleMap& obstacles,
                                  double inflation = kDangerInflation);

/// Crops to the bounding box of all labels and the goal circle, grown by
/// `margin` and clamped to the frame. Label and goal positions are rewritten
/// into crop coordinates; `crop` records the rectangle in the source frame.
AnnotatedFrame crop_to_labels(const AnnotatedFrame& af, int margin);

/// Glyph height used by draw() for a frame of the given height.
int glyph_height(int frame_height);

inline constexpr Rgb kGoalRed{220, 30, 30};

/// Renders the annotation: filled red goal circle, then each label id in
/// white with a black outline.
Frame draw(const AnnotatedFrame& af);

}  // namespace s2p
