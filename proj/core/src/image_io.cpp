#include "s2p/image_io.hpp"

#include <png.h>

#include <cstring>

#include "s2p/error.hpp"
#include "s2p/util.hpp"

namespace s2p {

namespace {

std::vector<std::uint8_t> encode(const void* pixels, int width, int height, png_uint_32 format,
                                 int channels) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  png_alloc_size_t size = 0;
  const auto stride = static_cast<png_int_32>(width * channels);
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels, stride, nullptr))
    throw Error(ErrorCode::Io, std::string("png encode: ") + image.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels, stride, nullptr))
    throw Error(ErrorCode::Io, std::string("png encode: ") + image.message);
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> decode(std::span<const std::uint8_t> bytes, png_uint_32 format,
                                 int& width, int& height) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw Error(ErrorCode::Io, std::string("png decode: ") + image.message);
  image.format = format;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorCode::Io, std::string("png decode: ") + image.message);
  }
  width = static_cast<int>(image.width);
  height = static_cast<int>(image.height);
  return pixels;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Frame& frame) {
  return encode(frame.data().data(), frame.width(), frame.height(), PNG_FORMAT_RGB, 3);
}

Frame decode_png(std::span<const std::uint8_t> bytes) {
  int w = 0;
  int h = 0;
  auto pixels = decode(bytes, PNG_FORMAT_RGB, w, h);
  return Frame(w, h, std::move(pixels), FrameSource::File);
}

void write_png(const std::filesystem::path& path, const Frame& frame) {
  write_file(path, encode_png(frame));
}

Frame read_png(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_png(bytes);
}

GrayImage read_gray_png(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  GrayImage img;
  img.pixels = decode(bytes, PNG_FORMAT_GRAY, img.width, img.height);
  return img;
}

std::vector<std::uint8_t> encode_gray_png(const GrayImage& image) {
  return encode(image.pixels.data(), image.width, image.height, PNG_FORMAT_GRAY, 1);
}

}  // namespace s2p
