#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "touchprint/enhancement.hpp"
#include "touchprint/image_io.hpp"

namespace touchprint {

struct QualityConfig {
  double grad_min = 48.0;   // Sobel magnitude threshold on the 0-255 scale
  double sharp_min = 0.05;  // minimum fraction of sharp pixels in the centre window
  int window = 32;          // centre window side
  int min_roi_height = 240;
  int min_roi_area = 50000;
  std::string external_cmd;  // optional scorer: PNG on stdin, integer 0-100 on stdout
};

struct QualityReport {
  double sharpness = 0.0;
  bool size_ok = false;
  int composite = 0;
  bool passed = false;
};

/// Per-pixel Sobel magnitudes of the centred window, normalised so that an
/// ideal 0->255 step reads 255.
inline std::vector<double> centre_gradient_magnitudes(const ChannelImage& img, int window) {
  if (img.width < window || img.height < window) {
    throw Error(ErrorCode::TooSmall, "image smaller than the " + std::to_string(window) + "px sharpness window");
  }
  const int x0 = (img.width - window) / 2, y0 = (img.height - window) / 2;
  auto px = [&](int x, int y) {
    return static_cast<double>(img.at(std::clamp(x, 0, img.width - 1), std::clamp(y, 0, img.height - 1)));
  };
  std::vector<double> mags;
  mags.reserve(static_cast<std::size_t>(window) * window);
  for (int y = y0; y < y0 + window; ++y) {
    for (int x = x0; x < x0 + window; ++x) {
      const double gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const double gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      mags.push_back(std::min(255.0, std::hypot(gx, gy) / 4.0));
    }
  }
  return mags;
}

/// 256-bin histogram of the centre-window gradient magnitudes (debug output).
inline std::array<int, 256> sharpness_histogram(const FingerprintImage& fp, const QualityConfig& cfg = {}) {
  std::array<int, 256> h{};
  for (double m : centre_gradient_magnitudes(fp.gray, cfg.window)) ++h[static_cast<int>(m)];
  return h;
}

inline double sharpness_score(const FingerprintImage& fp, const QualityConfig& cfg = {}) {
  const auto mags = centre_gradient_magnitudes(fp.gray, cfg.window);
  std::size_t sharp = 0;
  for (double m : mags) sharp += m > cfg.grad_min;
  return static_cast<double>(sharp) / static_cast<double>(mags.size());
}

inline bool check_size(int roi_width, int roi_height, const QualityConfig& cfg = {}) {
  return roi_height >= cfg.min_roi_height &&
         static_cast<long long>(roi_width) * roi_height >= cfg.min_roi_area;
}

inline bool check_size(const FingerprintImage& fp, const QualityConfig& cfg = {}) {
  return check_size(fp.roi_width, fp.roi_height, cfg);
}

/// round(100 (0.4 S + 0.4 C + 0.2 F)), inputs clamped to [0, 1].
inline int composite_quality(double sharpness, double contrast, double fill) {
  auto unit = [](double v) { return std::clamp(v, 0.0, 1.0); };
  return static_cast<int>(std::lround(100.0 * (0.4 * unit(sharpness) + 0.4 * unit(contrast) + 0.2 * unit(fill))));
}

inline double roi_contrast(const FingerprintImage& fp) {
  double n = 0, s = 0, s2 = 0;
  for (std::size_t i = 0; i < fp.gray.values.size(); ++i) {
    if (!fp.roi.bits.empty() && !fp.roi.bits[i]) continue;
    const double v = fp.gray.values[i];
    n += 1;
    s += v;
    s2 += v * v;
  }
  if (n == 0) return 0.0;
  const double mean = s / n;
  const double var = std::max(0.0, s2 / n - mean * mean);
  return std::min(std::sqrt(var) / 64.0, 1.0);
}

inline int quality_score(const FingerprintImage& fp, double mask_fill, const QualityConfig& cfg = {}) {
  const double s = fp.gray.width >= cfg.window && fp.gray.height >= cfg.window ? sharpness_score(fp, cfg) : 0.0;
  return composite_quality(s, roi_contrast(fp), mask_fill);
}

namespace detail {

inline std::mutex& external_scorer_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// Delegates scoring to an external binary; one child process at a time.
inline int external_quality_score(const FingerprintImage& fp, const std::string& cmd) {
  std::lock_guard lock(detail::external_scorer_mutex());
  const auto tmp = std::filesystem::temp_directory_path() / "touchprint_quality_probe.png";
  io::write_image(tmp, fp.gray);
  const std::string full = cmd + " < '" + tmp.string() + "'";
  std::FILE* pipe = ::popen(full.c_str(), "r");
  if (!pipe) throw Error(ErrorCode::IoError, "cannot run external scorer '" + cmd + "'");
  int value = -1;
  const int read = std::fscanf(pipe, "%d", &value);
  const int status = ::pclose(pipe);
  std::error_code ec;
  std::filesystem::remove(tmp, ec);
  if (read != 1 || status != 0) throw Error(ErrorCode::IoError, "external scorer failed: '" + cmd + "'");
  return std::clamp(value, 0, 100);
}

inline QualityReport assess_quality(const FingerprintImage& fp, const QualityConfig& cfg = {}) {
  QualityReport r;
  r.sharpness = fp.gray.width >= cfg.window && fp.gray.height >= cfg.window ? sharpness_score(fp, cfg) : 0.0;
  r.size_ok = check_size(fp, cfg);
  r.composite = cfg.external_cmd.empty() ? composite_quality(r.sharpness, roi_contrast(fp), fp.roi_fill())
                                         : external_quality_score(fp, cfg.external_cmd);
  r.passed = r.sharpness >= cfg.sharp_min && r.size_ok;
  return r;
}

/// Index of the highest composite score; ties resolve to the lowest index.
inline std::size_t select_best(std::span<const int> composites) {
  if (composites.empty()) throw Error(ErrorCode::NoCandidates, "no candidate samples");
  std::size_t best = 0;
  for (std::size_t i = 1; i < composites.size(); ++i)
    if (composites[i] > composites[best]) best = i;
  return best;
}

inline std::size_t select_best(std::span<const QualityReport> reports) {
  std::vector<int> c;
  c.reserve(reports.size());
  for (const auto& r : reports) c.push_back(r.composite);
  return select_best(std::span<const int>(c));
}

}  // namespace touchprint
