#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "s2p/fpv_world.hpp"
#include "s2p/memory_store.hpp"
#include "s2p/rng.hpp"
#include "s2p/types.hpp"

namespace s2p::testing {

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "s2p-test-XXXXXX").string();
    if (mkdtemp(tmpl.data()) == nullptr) std::abort();
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Gaussian unit vector.
inline std::vector<float> random_unit(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double n = 0.0;
  for (auto& x : v) {
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    x = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    n += x * x;
  }
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / std::sqrt(n));
  return out;
}

inline Frame noise_frame(Rng& rng, int w = 32, int h = 24) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  for (auto& b : px) b = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  return Frame(w, h, std::move(px));
}

/// Open room: outer wall ring only, agent at `agent` facing `heading`.
inline FpvScene open_room(int width, int height, Cell agent, int heading = 0) {
  FpvScene s;
  s.width = width;
  s.height = height;
  s.walls.assign(static_cast<std::size_t>(width) * height, 0);
  for (int x = 0; x < width; ++x) {
    s.walls[static_cast<std::size_t>(x)] = 1;
    s.walls[static_cast<std::size_t>(height - 1) * width + x] = 1;
  }
  for (int y = 0; y < height; ++y) {
    s.walls[static_cast<std::size_t>(y) * width] = 1;
    s.walls[static_cast<std::size_t>(y) * width + width - 1] = 1;
  }
  s.agent = {agent, heading, Pitch::Level};
  s.room = RoomType::Kitchen;
  s.room_id = "kitchen-00000000";
  return s;
}

}  // namespace s2p::testing
