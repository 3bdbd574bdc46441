#pragma once

#include <string_view>

#include "s2p/types.hpp"

namespace s2p {

/// Pixel box of a rendered numeric label, outline included.
struct TextBox {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

/// Box occupied by `digits` rendered `height` pixels tall, centred on `center`.
TextBox text_box(std::string_view digits, PixelPoint center, int height);

/// Renders digits from the embedded 7x9 bitmap font, scaled with nearest
/// neighbour sampling, with a one pixel outline. Non-digit characters are
/// skipped.
void draw_digits(Frame& frame, std::string_view digits, PixelPoint center, int height, Rgb fill,
                 Rgb outline);

}  // namespace s2p
