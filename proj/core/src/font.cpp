#include "s2p/font.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace s2p {

namespace {

constexpr int kGlyphW = 7;
constexpr int kGlyphH = 9;

using Glyph = std::array<const char*, kGlyphH>;

// clang-format off
constexpr std::array<Glyph, 10> kDigits = {{
  {" ##### ", "##   ##", "##  ###", "## # ##", "###  ##", "##   ##", "##   ##", "##   ##", " ##### "},
  {"   ##  ", "  ###  ", " ####  ", "   ##  ", "   ##  ", "   ##  ", "   ##  ", "   ##  ", " ######"},
  {" ##### ", "##   ##", "     ##", "    ## ", "   ##  ", "  ##   ", " ##    ", "##     ", "#######"},
  {" ##### ", "##   ##", "     ##", "     ##", "  #### ", "     ##", "     ##", "##   ##", " ##### "},
  {"    ## ", "   ### ", "  # ## ", " #  ## ", "#   ## ", "#######", "    ## ", "    ## ", "    ## "},
  {"#######", "##     ", "##     ", "###### ", "     ##", "     ##", "     ##", "##   ##", " ##### "},
  {"  #### ", " ##    ", "##     ", "###### ", "##   ##", "##   ##", "##   ##", "##   ##", " ##### "},
  {"#######", "     ##", "    ## ", "    ## ", "   ##  ", "   ##  ", "  ##   ", "  ##   ", "  ##   "},
  {" ##### ", "##   ##", "##   ##", "##   ##", " ##### ", "##   ##", "##   ##", "##   ##", " ##### "},
  {" ##### ", "##   ##", "##   ##", "##   ##", " ######", "     ##", "     ##", "    ## ", " ####  "},
}};
// clang-format on

struct Layout {
  double scale;
  int glyph_w;
  int gap;
  int text_w;
  int text_h;
};

Layout layout(std::string_view digits, int height) {
  Layout l{};
  l.scale = static_cast<double>(height) / kGlyphH;
  l.glyph_w = std::max(1, static_cast<int>(std::lround(kGlyphW * l.scale)));
  l.gap = std::max(1, static_cast<int>(std::lround(l.scale)));
  int n = 0;
  for (char c : digits)
    if (c >= '0' && c <= '9') ++n;
  l.text_w = n == 0 ? 0 : n * l.glyph_w + (n - 1) * l.gap;
  l.text_h = height;
  return l;
}

}  // namespace

TextBox text_box(std::string_view digits, PixelPoint center, int height) {
  const auto l = layout(digits, height);
  const int w = l.text_w + 2;
  const int h = l.text_h + 2;
  return {static_cast<int>(std::lround(center.u - w / 2.0)), static_cast<int>(std::lround(center.v - h / 2.0)),
          w, h};
}

void draw_digits(Frame& frame, std::string_view digits, PixelPoint center, int height, Rgb fill,
                 Rgb outline) {
  const auto l = layout(digits, height);
  const auto box = text_box(digits, center, height);
  if (l.text_w == 0) return;
  // Rasterize into a mask with a one pixel border for the outline.
  const int mw = box.width;
  const int mh = box.height;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(mw) * mh, 0);
  int pen = 1;
  for (char c : digits) {
    if (c < '0' || c > '9') continue;
    const auto& g = kDigits[static_cast<std::size_t>(c - '0')];
    for (int y = 0; y < l.text_h; ++y) {
      const int sy = std::min(kGlyphH - 1, static_cast<int>(y / l.scale));
      for (int x = 0; x < l.glyph_w; ++x) {
        const int sx = std::min(kGlyphW - 1, static_cast<int>(x * kGlyphW / l.glyph_w));
        if (g[static_cast<std::size_t>(sy)][sx] == '#') mask[static_cast<std::size_t>(y + 1) * mw + pen + x] = 1;
      }
    }
    pen += l.glyph_w + l.gap;
  }
  for (int y = 0; y < mh; ++y) {
    for (int x = 0; x < mw; ++x) {
      if (mask[static_cast<std::size_t>(y) * mw + x]) {
        frame.blend_set(box.x + x, box.y + y, fill);
        continue;
      }
      bool edge = false;
      for (int dy = -1; dy <= 1 && !edge; ++dy)
        for (int dx = -1; dx <= 1 && !edge; ++dx) {
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx >= 0 && ny >= 0 && nx < mw && ny < mh && mask[static_cast<std::size_t>(ny) * mw + nx]) edge = true;
        }
      if (edge) frame.blend_set(box.x + x, box.y + y, outline);
    }
  }
}

}  // namespace s2p
