#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <span>
#include <tuple>
#include <vector>

#include "touchprint/enhancement.hpp"
#include "touchprint/morphology.hpp"
#include "touchprint/raster.hpp"

namespace touchprint {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr int kMaxMinutiae = 1024;

/// Untyped minutia: pixel position and ridge direction. The direction is held
/// in storage units of 2*pi/65536 so templates survive serialisation exactly.
/// Angles use image coordinates: direction vector (cos a, sin a) with y down.
struct Minutia {
  int x = 0;
  int y = 0;
  std::uint16_t angle_code = 0;

  double angle() const { return angle_code * (kTwoPi / 65536.0); }

  static std::uint16_t encode_angle(double radians) {
    double turns = std::fmod(radians, kTwoPi);
    if (turns < 0) turns += kTwoPi;
    return static_cast<std::uint16_t>(std::lround(turns * 65536.0 / kTwoPi) & 0xFFFF);
  }
  static Minutia make(int x, int y, double radians) { return {x, y, encode_angle(radians)}; }

  bool operator==(const Minutia&) const = default;
};

inline bool minutia_order(const Minutia& a, const Minutia& b) {
  return std::tie(a.y, a.x, a.angle_code) < std::tie(b.y, b.x, b.angle_code);
}

struct MinutiaTemplate {
  int finger_id = 0;
  int width = 0;
  int height = 0;
  std::vector<Minutia> minutiae;  // sorted by (y, x)

  bool operator==(const MinutiaTemplate&) const = default;
};

struct MinutiaeConfig {
  int block_size = 16;
  int smooth_length = 7;     // oriented mean filter taps along the ridge
  int threshold_block = 16;  // adaptive mean window
  int border_px = 15;
  double merge_px = 6.0;
  int max_minutiae = kMaxMinutiae;
  int trace_length = 10;  // skeleton steps used for the local tangent
};

// --- orientation field ------------------------------------------------------

/// Block-wise ridge orientation from averaged squared gradients. Also keeps
/// integral images of the gradient moments for pixel-centred estimates.
struct OrientationField {
  int block_size = 16;
  int cols = 0, rows = 0;
  int width = 0, height = 0;
  std::vector<double> angles;     // ridge direction per block, [0, pi)
  std::vector<double> coherence;  // per block, [0, 1]
  std::vector<double> sxx, syy, sxy;  // (width+1) x (height+1) integral images

  double block_angle(int bx, int by) const { return angles[static_cast<std::size_t>(by) * cols + bx]; }
  double block_coherence(int bx, int by) const { return coherence[static_cast<std::size_t>(by) * cols + bx]; }
  double angle_at_pixel(int x, int y) const {
    return block_angle(std::clamp(x / block_size, 0, cols - 1), std::clamp(y / block_size, 0, rows - 1));
  }

  /// Orientation and coherence over the (2r+1)^2 window centred on (x, y).
  std::pair<double, double> local(int x, int y, int r) const {
    const int x0 = std::clamp(x - r, 0, width), x1 = std::clamp(x + r + 1, 0, width);
    const int y0 = std::clamp(y - r, 0, height), y1 = std::clamp(y + r + 1, 0, height);
    return moments_to_orientation(box(sxx, x0, y0, x1, y1), box(syy, x0, y0, x1, y1), box(sxy, x0, y0, x1, y1));
  }

  static std::pair<double, double> moments_to_orientation(double gxx, double gyy, double gxy) {
    const double denom = gxx + gyy;
    double theta = 0.5 * std::atan2(2.0 * gxy, gxx - gyy) + std::numbers::pi / 2.0;
    theta = std::fmod(theta, std::numbers::pi);
    if (theta < 0) theta += std::numbers::pi;
    if (theta >= std::numbers::pi) theta -= std::numbers::pi;
    const double coh = denom > 1e-12 ? std::sqrt((gxx - gyy) * (gxx - gyy) + 4.0 * gxy * gxy) / denom : 0.0;
    return {theta, std::min(coh, 1.0)};
  }

 private:
  double box(const std::vector<double>& s, int x0, int y0, int x1, int y1) const {
    const std::size_t w = static_cast<std::size_t>(width) + 1;
    return s[y1 * w + x1] - s[y0 * w + x1] - s[y1 * w + x0] + s[y0 * w + x0];
  }
};

/// Gradients whose 3x3 support leaves the ROI are ignored.
inline OrientationField orientation_field(const ChannelImage& gray, const BinaryMask* roi = nullptr,
                                          int block_size = 16) {
  if (gray.width < 1 || gray.height < 1) throw Error(ErrorCode::InvalidArgument, "empty image");
  OrientationField of;
  of.block_size = block_size;
  of.width = gray.width;
  of.height = gray.height;
  of.cols = (gray.width + block_size - 1) / block_size;
  of.rows = (gray.height + block_size - 1) / block_size;
  const int w = gray.width, h = gray.height;
  const std::size_t iw = static_cast<std::size_t>(w) + 1;
  of.sxx.assign(iw * (h + 1), 0.0);
  of.syy.assign(iw * (h + 1), 0.0);
  of.sxy.assign(iw * (h + 1), 0.0);

  auto px = [&](int x, int y) {
    return static_cast<double>(gray.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)));
  };
  auto inside_roi = [&](int x, int y) {
    if (!roi) return true;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (!roi->get_or_zero(x + dx, y + dy)) return false;
    return true;
  };
  for (int y = 0; y < h; ++y) {
    double rxx = 0, ryy = 0, rxy = 0;
    for (int x = 0; x < w; ++x) {
      double gx = 0, gy = 0;
      if (inside_roi(x, y)) {
        gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
             (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
        gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
             (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      }
      rxx += gx * gx;
      ryy += gy * gy;
      rxy += gx * gy;
      const std::size_t i = (y + 1) * iw + x + 1;
      of.sxx[i] = of.sxx[i - iw] + rxx;
      of.syy[i] = of.syy[i - iw] + ryy;
      of.sxy[i] = of.sxy[i - iw] + rxy;
    }
  }
  of.angles.resize(static_cast<std::size_t>(of.cols) * of.rows);
  of.coherence.resize(of.angles.size());
  for (int by = 0; by < of.rows; ++by) {
    for (int bx = 0; bx < of.cols; ++bx) {
      const int x0 = bx * block_size, y0 = by * block_size;
      const int x1 = std::min(w, x0 + block_size), y1 = std::min(h, y0 + block_size);
      auto box = [&](const std::vector<double>& s) {
        return s[y1 * iw + x1] - s[y0 * iw + x1] - s[y1 * iw + x0] + s[y0 * iw + x0];
      };
      const auto [theta, coh] = OrientationField::moments_to_orientation(box(of.sxx), box(of.syy), box(of.sxy));
      of.angles[static_cast<std::size_t>(by) * of.cols + bx] = theta;
      of.coherence[static_cast<std::size_t>(by) * of.cols + bx] = coh;
    }
  }
  return of;
}

inline OrientationField orientation_field(const FingerprintImage& fp, int block_size = 16) {
  return orientation_field(fp.gray, fp.roi.bits.empty() ? nullptr : &fp.roi, block_size);
}

// --- thinning ---------------------------------------------------------------

namespace skeleton {

// Neighbour code bits, clockwise from north: N NE E SE S SW W NW.
inline constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
inline constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

inline std::uint8_t neighbour_code(const BinaryMask& m, int x, int y) {
  std::uint8_t code = 0;
  for (int k = 0; k < 8; ++k)
    if (m.get_or_zero(x + kDx[k], y + kDy[k])) code |= static_cast<std::uint8_t>(1u << k);
  return code;
}

inline constexpr bool bit(int code, int k) { return ((code >> (k & 7)) & 1) != 0; }

/// 0->1 transitions around the neighbour cycle.
inline constexpr int transitions(int code) {
  int a = 0;
  for (int k = 0; k < 8; ++k) a += !bit(code, k) && bit(code, k + 1);
  return a;
}

/// Half the number of value changes around the cycle.
inline constexpr int crossing_number(int code) {
  int s = 0;
  for (int k = 0; k < 8; ++k) s += bit(code, k) != bit(code, k + 1);
  return s / 2;
}

/// 8-connectivity number (Yokoi); 1 means the pixel is simple.
inline constexpr int connectivity8(int code) {
  int n = 0;
  for (int k = 0; k < 8; k += 2) {
    const int q0 = !bit(code, k), q1 = !bit(code, k + 1), q2 = !bit(code, k + 2);
    n += q0 - q0 * q1 * q2;
  }
  return n;
}

struct Tables {
  std::array<bool, 256> zs_first{}, zs_second{};
  std::array<std::uint8_t, 256> cn{};
};

inline const Tables& tables() {
  static const Tables t = [] {
    Tables t;
    for (int c = 0; c < 256; ++c) {
      const int b = std::popcount(static_cast<unsigned>(c));
      const bool base = b >= 2 && b <= 6 && transitions(c) == 1;
      const bool n = bit(c, 0), e = bit(c, 2), s = bit(c, 4), w = bit(c, 6);
      t.zs_first[c] = base && !(n && e && s) && !(e && s && w);
      t.zs_second[c] = base && !(n && e && w) && !(n && s && w);
      t.cn[c] = static_cast<std::uint8_t>(crossing_number(c));
    }
    return t;
  }();
  return t;
}

inline bool has_square(const BinaryMask& m) {
  for (int y = 0; y + 1 < m.height; ++y)
    for (int x = 0; x + 1 < m.width; ++x)
      if (m.get(x, y) && m.get(x + 1, y) && m.get(x, y + 1) && m.get(x + 1, y + 1)) return true;
  return false;
}

}  // namespace skeleton

/// Zhang-Suen thinning followed by removal of any remaining 2x2 blocks
/// through simple (topology-preserving) pixels.
inline BinaryMask thin_zhang_suen(const BinaryMask& input) {
  BinaryMask m = input;
  const auto& tab = skeleton::tables();
  std::vector<int> fg;
  for (int i = 0; i < static_cast<int>(m.bits.size()); ++i)
    if (m.bits[i]) fg.push_back(i);
  std::vector<int> doomed;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      doomed.clear();
      for (int p : fg) {
        const int x = p % m.width, y = p / m.width;
        const auto code = skeleton::neighbour_code(m, x, y);
        if (pass == 0 ? tab.zs_first[code] : tab.zs_second[code]) doomed.push_back(p);
      }
      if (doomed.empty()) continue;
      changed = true;
      for (int p : doomed) m.bits[p] = 0;
      std::erase_if(fg, [&](int p) { return m.bits[p] == 0; });
    }
  }
  constexpr std::array<std::pair<int, int>, 4> kBlock{{{0, 0}, {1, 0}, {0, 1}, {1, 1}}};
  auto is_square = [&](int x, int y) { return m.get(x, y) && m.get(x + 1, y) && m.get(x, y + 1) && m.get(x + 1, y + 1); };
  for (;;) {
    for (bool progress = true; progress;) {
      progress = false;
      for (int y = 0; y + 1 < m.height; ++y) {
        for (int x = 0; x + 1 < m.width; ++x) {
          if (!is_square(x, y)) continue;
          for (auto [dx, dy] : kBlock) {
            const auto code = skeleton::neighbour_code(m, x + dx, y + dy);
            if (skeleton::connectivity8(code) == 1 && std::popcount(static_cast<unsigned>(code)) >= 2) {
              m.set(x + dx, y + dy, false);
              progress = true;
              break;
            }
          }
        }
      }
    }
    // A block whose four pixels all carry their own branch has no simple
    // pixel; breaking it at the least connected pixel trades one branch for
    // a guaranteed one-pixel-wide result.
    bool broke = false;
    for (int y = 0; y + 1 < m.height && !broke; ++y) {
      for (int x = 0; x + 1 < m.width && !broke; ++x) {
        if (!is_square(x, y)) continue;
        std::pair<int, int> victim = kBlock[0];
        int fewest = 9;
        for (auto [dx, dy] : kBlock) {
          const int n = std::popcount(static_cast<unsigned>(skeleton::neighbour_code(m, x + dx, y + dy)));
          if (n < fewest) {
            fewest = n;
            victim = {dx, dy};
          }
        }
        m.set(x + victim.first, y + victim.second, false);
        broke = true;
      }
    }
    if (!broke) return m;
  }
}

/// Ridge skeleton: oriented smoothing along the block orientation, adaptive
/// mean threshold (ridges darker than their neighbourhood), Zhang-Suen thinning.
inline BinaryMask binarize_and_thin(const ChannelImage& gray, const BinaryMask& roi, const OrientationField& of,
                                    const MinutiaeConfig& cfg = {}) {
  const int w = gray.width, h = gray.height;
  const int half = cfg.smooth_length / 2;
  std::vector<double> smooth(static_cast<std::size_t>(w) * h, 0.0);
  auto sample = [&](double fx, double fy) {
    fx = std::clamp(fx, 0.0, w - 1.0);
    fy = std::clamp(fy, 0.0, h - 1.0);
    const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
    const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
    const double ax = fx - x0, ay = fy - y0;
    const double top = gray.at(x0, y0) + (gray.at(x1, y0) - static_cast<double>(gray.at(x0, y0))) * ax;
    const double bot = gray.at(x0, y1) + (gray.at(x1, y1) - static_cast<double>(gray.at(x0, y1))) * ax;
    return top + (bot - top) * ay;
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!roi.get(x, y)) continue;
      const double theta = of.angle_at_pixel(x, y);
      const double c = std::cos(theta), s = std::sin(theta);
      double acc = 0;
      for (int k = -half; k <= half; ++k) acc += sample(x + k * c, y + k * s);
      smooth[static_cast<std::size_t>(y) * w + x] = acc / (2 * half + 1);
    }
  }

  // Window mean over ROI pixels only.
  const std::size_t iw = static_cast<std::size_t>(w) + 1;
  std::vector<double> isum(iw * (h + 1), 0.0), icnt(iw * (h + 1), 0.0);
  for (int y = 0; y < h; ++y) {
    double rs = 0, rc = 0;
    for (int x = 0; x < w; ++x) {
      if (roi.get(x, y)) {
        rs += smooth[static_cast<std::size_t>(y) * w + x];
        rc += 1;
      }
      isum[(y + 1) * iw + x + 1] = isum[y * iw + x + 1] + rs;
      icnt[(y + 1) * iw + x + 1] = icnt[y * iw + x + 1] + rc;
    }
  }
  const int r = cfg.threshold_block / 2;
  BinaryMask ridges(w, h);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - r), y1 = std::min(h, y + r + 1);
    for (int x = 0; x < w; ++x) {
      if (!roi.get(x, y)) continue;
      const int x0 = std::max(0, x - r), x1 = std::min(w, x + r + 1);
      const double s = isum[y1 * iw + x1] - isum[y0 * iw + x1] - isum[y1 * iw + x0] + isum[y0 * iw + x0];
      const double n = icnt[y1 * iw + x1] - icnt[y0 * iw + x1] - icnt[y1 * iw + x0] + icnt[y0 * iw + x0];
      ridges.set(x, y, smooth[static_cast<std::size_t>(y) * w + x] < s / n);
    }
  }
  return thin_zhang_suen(ridges);
}

inline BinaryMask binarize_and_thin(const FingerprintImage& fp, const OrientationField& of,
                                    const MinutiaeConfig& cfg = {}) {
  const BinaryMask roi = fp.roi.bits.empty() ? BinaryMask(fp.gray.width, fp.gray.height, true) : fp.roi;
  return binarize_and_thin(fp.gray, roi, of, cfg);
}

// --- crossing number --------------------------------------------------------

namespace detail {

/// Centroid of skeleton pixels reachable from `start` within `depth` steps
/// without entering `blocked`. Returns false when nothing beyond start is reached.
inline bool trace_centroid(const BinaryMask& skel, int sx, int sy, std::span<const std::pair<int, int>> blocked,
                           int depth, bool include_start, double& cx, double& cy) {
  std::vector<std::pair<int, int>> frontier{{sx, sy}}, next, seen{{sx, sy}};
  seen.insert(seen.end(), blocked.begin(), blocked.end());
  auto is_seen = [&](int x, int y) {
    return std::any_of(seen.begin(), seen.end(), [&](const auto& p) { return p.first == x && p.second == y; });
  };
  double ax = include_start ? sx : 0.0, ay = include_start ? sy : 0.0;
  int n = include_start ? 1 : 0;
  for (int d = 0; d < depth && !frontier.empty(); ++d) {
    next.clear();
    for (auto [x, y] : frontier) {
      for (int k = 0; k < 8; ++k) {
        const int nx = x + skeleton::kDx[k], ny = y + skeleton::kDy[k];
        if (!skel.get_or_zero(nx, ny) || is_seen(nx, ny)) continue;
        seen.emplace_back(nx, ny);
        next.emplace_back(nx, ny);
        ax += nx;
        ay += ny;
        ++n;
      }
    }
    frontier.swap(next);
  }
  if (n == 0 || (!include_start && n == 0)) return false;
  cx = ax / n;
  cy = ay / n;
  return true;
}

inline double resolve_with_field(double traced, bool have_trace, const OrientationField& of, int x, int y) {
  const auto [theta, coh] = of.local(x, y, of.block_size / 2);
  if (!have_trace) return theta;
  if (coh < 0.2) return traced;
  const double alt = theta + std::numbers::pi;
  auto diff = [](double a, double b) {
    double d = std::fmod(std::abs(a - b), kTwoPi);
    return d > std::numbers::pi ? kTwoPi - d : d;
  };
  return diff(theta, traced) <= diff(alt, traced) ? theta : alt;
}

}  // namespace detail

/// Ridge endings (CN = 1) and bifurcations (CN = 3), emitted untyped.
inline std::vector<Minutia> extract_minutiae(const BinaryMask& skel, const OrientationField& of,
                                             const MinutiaeConfig& cfg = {}) {
  if (skeleton::has_square(skel)) throw Error(ErrorCode::NotThin, "skeleton contains a 2x2 block");
  const auto& tab = skeleton::tables();
  std::vector<Minutia> out;
  for (int y = 0; y < skel.height; ++y) {
    for (int x = 0; x < skel.width; ++x) {
      if (!skel.get(x, y)) continue;
      const auto code = skeleton::neighbour_code(skel, x, y);
      const int cn = tab.cn[code];
      if (cn != 1 && cn != 3) continue;

      double traced = 0;
      bool have = false;
      if (cn == 1) {
        double cx, cy;
        if (detail::trace_centroid(skel, x, y, {}, cfg.trace_length, false, cx, cy)) {
          const double dx = x - cx, dy = y - cy;
          if (dx != 0 || dy != 0) {
            traced = std::atan2(dy, dx);
            have = true;
          }
        }
      } else {
        // One representative per neighbour run, preferring 4-neighbours.
        std::vector<std::pair<int, int>> reps, members;
        for (int k = 0; k < 8; ++k) {
          if (!skeleton::bit(code, k) || skeleton::bit(code, k + 7)) continue;  // run starts at k
          int best = k;
          for (int j = k; skeleton::bit(code, j) && j < k + 8; ++j) {
            members.emplace_back(x + skeleton::kDx[j & 7], y + skeleton::kDy[j & 7]);
            if ((j & 7) % 2 == 0 && best % 2 != 0) best = j & 7;
          }
          reps.emplace_back(x + skeleton::kDx[best & 7], y + skeleton::kDy[best & 7]);
        }
        if (reps.size() == 3) {
          std::array<std::pair<double, double>, 3> dirs{};
          bool ok = true;
          for (std::size_t i = 0; i < 3 && ok; ++i) {
            std::vector<std::pair<int, int>> blocked{{x, y}};
            for (const auto& m : members)
              if (m != reps[i]) blocked.push_back(m);
            double cx, cy;
            ok = detail::trace_centroid(skel, reps[i].first, reps[i].second, blocked, cfg.trace_length - 1, true,
                                        cx, cy);
            const double dx = cx - x, dy = cy - y, len = std::hypot(dx, dy);
            if (len == 0) ok = false;
            dirs[i] = {dx / len, dy / len};
          }
          if (ok) {
            // The two most aligned branches form the fork; the third is the stem.
            int stem = 0;
            double best_dot = -2;
            for (int i = 0; i < 3; ++i) {
              const auto& a = dirs[(i + 1) % 3];
              const auto& b = dirs[(i + 2) % 3];
              const double dot = a.first * b.first + a.second * b.second;
              if (dot > best_dot) {
                best_dot = dot;
                stem = i;
              }
            }
            const auto& a = dirs[(stem + 1) % 3];
            const auto& b = dirs[(stem + 2) % 3];
            const double vx = a.first + b.first - dirs[stem].first;
            const double vy = a.second + b.second - dirs[stem].second;
            if (vx != 0 || vy != 0) {
              traced = std::atan2(vy, vx);
              have = true;
            }
          }
        }
      }
      out.push_back(Minutia::make(x, y, detail::resolve_with_field(traced, have, of, x, y)));
    }
  }
  return out;
}

// --- pruning ----------------------------------------------------------------

/// Drops minutiae within `border_px` of the ROI boundary, merges pairs closer
/// than `merge_px` (keeping the one nearer the ROI centroid) and caps the count.
inline std::vector<Minutia> prune_minutiae(const std::vector<Minutia>& ms, const BinaryMask& roi,
                                           const MinutiaeConfig& cfg = {}) {
  if (ms.empty()) return {};
  const auto dist2 = morph::squared_distance_to_background(roi);
  const double b2 = static_cast<double>(cfg.border_px) * cfg.border_px;
  std::vector<Minutia> kept;
  for (const auto& m : ms) {
    if (!roi.inside(m.x, m.y)) continue;
    if (dist2[static_cast<std::size_t>(m.y) * roi.width + m.x] > b2) kept.push_back(m);
  }
  std::sort(kept.begin(), kept.end(), minutia_order);

  double cx = 0, cy = 0, n = 0;
  for (int y = 0; y < roi.height; ++y)
    for (int x = 0; x < roi.width; ++x)
      if (roi.get(x, y)) {
        cx += x;
        cy += y;
        n += 1;
      }
  if (n > 0) {
    cx /= n;
    cy /= n;
  }
  auto centre_d2 = [&](const Minutia& m) { return (m.x - cx) * (m.x - cx) + (m.y - cy) * (m.y - cy); };

  struct Pair {
    double d2;
    std::size_t i, j;
  };
  std::vector<Pair> close;
  const double merge2 = cfg.merge_px * cfg.merge_px;
  for (std::size_t i = 0; i < kept.size(); ++i)
    for (std::size_t j = i + 1; j < kept.size(); ++j) {
      const double dx = kept[i].x - kept[j].x, dy = kept[i].y - kept[j].y;
      const double d2 = dx * dx + dy * dy;
      if (d2 < merge2) close.push_back({d2, i, j});
    }
  std::sort(close.begin(), close.end(),
            [](const Pair& a, const Pair& b) { return std::tie(a.d2, a.i, a.j) < std::tie(b.d2, b.i, b.j); });
  std::vector<bool> alive(kept.size(), true);
  for (const auto& p : close) {
    if (!alive[p.i] || !alive[p.j]) continue;
    // Keep the one nearer the centroid; on equal distance keep the earlier one.
    if (centre_d2(kept[p.j]) < centre_d2(kept[p.i])) {
      alive[p.i] = false;
    } else {
      alive[p.j] = false;
    }
  }
  std::vector<Minutia> merged;
  for (std::size_t i = 0; i < kept.size(); ++i)
    if (alive[i]) merged.push_back(kept[i]);

  const auto cap = static_cast<std::size_t>(std::min(cfg.max_minutiae, kMaxMinutiae));
  if (merged.size() > cap) {
    std::stable_sort(merged.begin(), merged.end(),
                     [&](const Minutia& a, const Minutia& b) { return centre_d2(a) < centre_d2(b); });
    merged.resize(cap);
    std::sort(merged.begin(), merged.end(), minutia_order);
  }
  return merged;
}

/// Full extraction for one normalised sample.
inline MinutiaTemplate extract_template(const FingerprintImage& fp, const MinutiaeConfig& cfg = {}) {
  const BinaryMask roi = fp.roi.bits.empty() ? BinaryMask(fp.gray.width, fp.gray.height, true) : fp.roi;
  const OrientationField of = orientation_field(fp.gray, &roi, cfg.block_size);
  const BinaryMask skel = binarize_and_thin(fp.gray, roi, of, cfg);
  MinutiaTemplate t;
  t.finger_id = fp.source_finger_id;
  t.width = fp.gray.width;
  t.height = fp.gray.height;
  t.minutiae = prune_minutiae(extract_minutiae(skel, of, cfg), roi, cfg);
  return t;
}

/// ROI of a stored sample: everything not belonging to the zero background
/// that surrounds it (closing bridges dark ridge pixels inside the ROI).
inline BinaryMask derive_roi(const ChannelImage& gray) {
  BinaryMask nonzero(gray.width, gray.height);
  for (std::size_t i = 0; i < gray.values.size(); ++i) nonzero.bits[i] = gray.values[i] != 0;
  BinaryMask closed = morph::dilate_disk(nonzero, 3);
  closed = morph::erode_disk(closed, 3);
  for (std::size_t i = 0; i < closed.bits.size(); ++i) closed.bits[i] = closed.bits[i] || nonzero.bits[i];
  return morph::fill_holes(largest_component(closed));
}

// --- .mtft codec ------------------------------------------------------------

inline constexpr std::array<std::uint8_t, 4> kTemplateMagic{'M', 'T', 'F', 'T'};
inline constexpr std::uint8_t kTemplateVersion = 1;

inline std::size_t encoded_size(const MinutiaTemplate& t) { return 12 + 6 * t.minutiae.size(); }

inline std::vector<std::uint8_t> encode_template(const MinutiaTemplate& t) {
  if (t.minutiae.size() > static_cast<std::size_t>(kMaxMinutiae)) {
    throw Error(ErrorCode::InvalidArgument, "template holds more than 1024 minutiae");
  }
  if (t.finger_id < 0 || t.finger_id > 255 || t.width < 0 || t.width > 65535 || t.height < 0 || t.height > 65535) {
    throw Error(ErrorCode::InvalidArgument, "template header out of range");
  }
  std::vector<std::uint8_t> out;
  out.reserve(encoded_size(t));
  auto u16 = [&](int v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  };
  out.insert(out.end(), kTemplateMagic.begin(), kTemplateMagic.end());
  out.push_back(kTemplateVersion);
  out.push_back(static_cast<std::uint8_t>(t.finger_id));
  u16(t.width);
  u16(t.height);
  u16(static_cast<int>(t.minutiae.size()));
  for (const auto& m : t.minutiae) {
    if (m.x < 0 || m.x > 65535 || m.y < 0 || m.y > 65535) {
      throw Error(ErrorCode::InvalidArgument, "minutia coordinate out of range");
    }
    u16(m.x);
    u16(m.y);
    u16(m.angle_code);
  }
  return out;
}

inline MinutiaTemplate decode_template(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw Error(ErrorCode::ParseError, "template shorter than its 12-byte header");
  if (!std::equal(kTemplateMagic.begin(), kTemplateMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::ParseError, "bad template magic");
  }
  if (bytes[4] != kTemplateVersion) throw Error(ErrorCode::ParseError, "unsupported template version");
  auto u16 = [&](std::size_t off) { return static_cast<int>(bytes[off] | (bytes[off + 1] << 8)); };
  MinutiaTemplate t;
  t.finger_id = bytes[5];
  t.width = u16(6);
  t.height = u16(8);
  const int count = u16(10);
  if (count > kMaxMinutiae) throw Error(ErrorCode::ParseError, "minutia count exceeds 1024");
  if (bytes.size() != 12 + 6 * static_cast<std::size_t>(count)) {
    throw Error(ErrorCode::ParseError, "template length does not match its minutia count");
  }
  t.minutiae.reserve(count);
  for (int i = 0; i < count; ++i) {
    const std::size_t off = 12 + 6 * static_cast<std::size_t>(i);
    t.minutiae.push_back({u16(off), u16(off + 2), static_cast<std::uint16_t>(u16(off + 4))});
  }
  return t;
}

inline void save_template(const std::filesystem::path& path, const MinutiaTemplate& t) {
  const auto bytes = encode_template(t);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

inline MinutiaTemplate load_template(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_template(bytes);
}

}  // namespace touchprint
