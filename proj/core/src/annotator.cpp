#include "s2p/annotator.hpp"

#include <algorithm>
#include <cmath>

#include "s2p/error.hpp"
#include "s2p/font.hpp"
#include "s2p/image_io.hpp"
#include "s2p/util.hpp"

namespace s2p {

FloorMask::FloorMask(int w, int h, bool fill)
    : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

bool FloorMask::clear_disk(int x, int y, double radius) const noexcept {
  const int r = static_cast<int>(std::floor(radius));
  const double r2 = radius * radius;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      if (dx * dx + dy * dy <= r2 && !traversable(x + dx, y + dy)) return false;
  return true;
}

FloorMask FloorMask::from_png(const std::filesystem::path& path) {
  const auto img = read_gray_png(path);
  FloorMask m(img.width, img.height, false);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) m.bits[i] = img.pixels[i] != 0 ? 1 : 0;
  return m;
}

void FloorMask::write_png(const std::filesystem::path& path) const {
  GrayImage img{width, height, std::vector<std::uint8_t>(bits.size())};
  for (std::size_t i = 0; i < bits.size(); ++i) img.pixels[i] = bits[i] ? 255 : 0;
  write_file(path, encode_gray_png(img));
}

AnnotatedFrame fpv_overlay(const Frame& frame) {
  if (frame.width() < kMinFpvFrameSize || frame.height() < kMinFpvFrameSize)
    throw Error(ErrorCode::FrameTooSmall,
                std::to_string(frame.width()) + "x" + std::to_string(frame.height()));
  AnnotatedFrame af;
  af.base = frame;
  af.setup = Setup::Fpv;
  const double radius = 0.35 * std::min(frame.width(), frame.height());
  const double cx = frame.width() / 2.0;
  // Lift the centre by one glyph so the end labels stay fully visible.
  const double cy = frame.height() - 1.0 - glyph_height(frame.height());
  for (int k = 1; k <= 7; ++k) {
    const double theta = deg2rad(180.0 - 30.0 * (k - 1));
    Label l;
    l.id = k;
    l.kind = LabelKind::ActionOverlay;
    l.pos = {cx + radius * std::cos(theta), cy - radius * std::sin(theta)};
    af.labels.push_back(l);
  }
  return af;
}

std::vector<Label> tpv_keypoints(PixelPoint robot_px, const FloorMask& mask, const RingSpec& spec,
                                 const Homography& ground_to_image) {
  if (!(spec.dr > 0 && spec.arc > 0 && spec.n_rings > 0 && spec.safety_radius > 0))
    throw Error(ErrorCode::Range, "ring spec");
  const int rx = static_cast<int>(std::lround(robot_px.u));
  const int ry = static_cast<int>(std::lround(robot_px.v));
  if (!mask.traversable(rx, ry))
    throw Error(ErrorCode::RobotOffFloor, std::to_string(rx) + "," + std::to_string(ry));
  if (std::abs(ground_to_image.determinant()) < 1e-12)
    throw Error(ErrorCode::InvalidArgument, "homography not invertible");

  const Homography inv = ground_to_image.inverse();
  const WorldPoint origin = unproject(inv, robot_px);

  std::vector<Label> labels;
  labels.push_back({0, robot_px, origin, LabelKind::RobotOrigin, true, false});
  int next_id = 1;
  for (int ring = 1; ring <= spec.n_rings; ++ring) {
    const double r = ring * spec.dr;
    const int n = static_cast<int>(std::lround(2.0 * kPi * r / spec.arc));
    for (int j = 0; j < n; ++j) {
      const double a = 2.0 * kPi * j / n;
      const WorldPoint w{origin.x + r * std::cos(a), origin.y + r * std::sin(a)};
      const PixelPoint p = project(ground_to_image, w);
      if (!(p.u >= 0 && p.v >= 0 && p.u < mask.width && p.v < mask.height)) continue;
      const int px = static_cast<int>(std::lround(p.u));
      const int py = static_cast<int>(std::lround(p.v));
      if (!mask.clear_disk(px, py, spec.safety_radius)) continue;
      labels.push_back({next_id++, p, w, LabelKind::Waypoint, true, false});
    }
  }
  if (labels.size() == 1) throw Error(ErrorCode::NoCandidates, "every ring point was filtered");
  return labels;
}

std::vector<Label> mark_dangerous(std::vector<Label> labels, const ObstacleMap& obstacles, double inflation) {
  for (auto& l : labels) {
    if (!l.world) continue;
    l.dangerous = obstacles.clearance(*l.world) < inflation;
  }
  return labels;
}

AnnotatedFrame crop_to_labels(const AnnotatedFrame& af, int margin) {
  if (af.labels.empty()) throw Error(ErrorCode::InvalidArgument, "crop needs at least one label");
  double x0 = af.labels.front().pos.u;
  double y0 = af.labels.front().pos.v;
  double x1 = x0;
  double y1 = y0;
  auto grow = [&](double u, double v) {
    x0 = std::min(x0, u);
    y0 = std::min(y0, v);
    x1 = std::max(x1, u);
    y1 = std::max(y1, v);
  };
  for (const auto& l : af.labels) grow(l.pos.u, l.pos.v);
  if (af.goal && af.goal->kind == GoalKind::RedCircle) {
    grow(af.goal->pos.u - af.goal->radius, af.goal->pos.v - af.goal->radius);
    grow(af.goal->pos.u + af.goal->radius, af.goal->pos.v + af.goal->radius);
  }
  const int W = af.base.width();
  const int H = af.base.height();
  const int cx0 = std::clamp(static_cast<int>(std::floor(x0)) - margin, 0, W - 1);
  const int cy0 = std::clamp(static_cast<int>(std::floor(y0)) - margin, 0, H - 1);
  const int cx1 = std::clamp(static_cast<int>(std::ceil(x1)) + margin, cx0, W - 1);
  const int cy1 = std::clamp(static_cast<int>(std::ceil(y1)) + margin, cy0, H - 1);
  const int cw = cx1 - cx0 + 1;
  const int ch = cy1 - cy0 + 1;

  std::vector<std::uint8_t> data(static_cast<std::size_t>(cw) * ch * 3);
  const auto src = af.base.data();
  for (int y = 0; y < ch; ++y) {
    const auto* row = &src[(static_cast<std::size_t>(cy0 + y) * W + cx0) * 3];
    std::copy(row, row + static_cast<std::ptrdiff_t>(cw) * 3, &data[static_cast<std::size_t>(y) * cw * 3]);
  }

  AnnotatedFrame out;
  out.base = Frame(cw, ch, std::move(data), af.base.source(), af.base.timestamp());
  out.setup = af.setup;
  PixelRect rect{cx0, cy0, cw, ch};
  if (af.crop) rect = {af.crop->x + cx0, af.crop->y + cy0, cw, ch};
  out.crop = rect;
  out.labels = af.labels;
  for (auto& l : out.labels) l.pos = {l.pos.u - cx0, l.pos.v - cy0};
  out.goal = af.goal;
  if (out.goal) out.goal->pos = {out.goal->pos.u - cx0, out.goal->pos.v - cy0};
  return out;
}

int glyph_height(int frame_height) { return std::max(12, frame_height / 40); }

Frame draw(const AnnotatedFrame& af) {
  Frame out = af.base;
  if (af.goal && af.goal->kind == GoalKind::RedCircle) {
    const auto& g = *af.goal;
    const int r = static_cast<int>(std::ceil(g.radius));
    const int gx = static_cast<int>(std::lround(g.pos.u));
    const int gy = static_cast<int>(std::lround(g.pos.v));
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx)
        if (dx * dx + dy * dy <= g.radius * g.radius) out.blend_set(gx + dx, gy + dy, kGoalRed);
  }
  const int h = glyph_height(af.base.height());
  for (const auto& l : af.labels)
    draw_digits(out, std::to_string(l.id), l.pos, h, Rgb{255, 255, 255}, Rgb{0, 0, 0});
  return out;
}

}  // namespace s2p
