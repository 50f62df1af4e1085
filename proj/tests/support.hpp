#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "touchprint/raster.hpp"

namespace testing_support {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("touchprint_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline touchprint::RasterImage solid_rgb(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  touchprint::RasterImage img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = r;
      img.at(x, y, 1) = g;
      img.at(x, y, 2) = b;
    }
  return img;
}

inline touchprint::BinaryMask rect_mask(int w, int h, int x0, int y0, int rw, int rh) {
  touchprint::BinaryMask m(w, h);
  for (int y = y0; y < y0 + rh; ++y)
    for (int x = x0; x < x0 + rw; ++x) m.set(x, y, true);
  return m;
}

inline touchprint::ChannelImage random_gray(std::mt19937_64& rng, int w, int h) {
  touchprint::ChannelImage img(w, h);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& v : img.values) v = static_cast<std::uint8_t>(d(rng));
  return img;
}

/// Smooth random texture: a few sinusoids plus noise, clamped to bytes.
inline touchprint::ChannelImage random_texture(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> u(0, 1);
  const double fx = 0.05 + 0.4 * u(rng), fy = 0.05 + 0.4 * u(rng), ph = 6.28 * u(rng);
  const double base = 40 + 150 * u(rng), amp = 10 + 60 * u(rng), noise = 2 + 20 * u(rng);
  std::normal_distribution<double> n(0, noise);
  touchprint::ChannelImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.at(x, y) = touchprint::clamp_byte(base + amp * std::sin(fx * x + ph) * std::cos(fy * y) + n(rng));
  return img;
}

}  // namespace testing_support
