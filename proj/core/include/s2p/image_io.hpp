#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "s2p/types.hpp"

namespace s2p {

/// 8-bit RGB PNG, no alpha.
std::vector<std::uint8_t> encode_png(const Frame& frame);
Frame decode_png(std::span<const std::uint8_t> bytes);

void write_png(const std::filesystem::path& path, const Frame& frame);
Frame read_png(const std::filesystem::path& path);

/// Single-channel PNG decode used for floor masks (any bit depth; colour
/// inputs are converted to grey first).
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};
GrayImage read_gray_png(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_gray_png(const GrayImage& image);

}  // namespace s2p
