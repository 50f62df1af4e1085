#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "touchprint/geometry.hpp"
#include "touchprint/raster.hpp"

/// Procedural test data: ridge patterns, finger crops and whole hand frames.
namespace touchprint::synth {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline double normal(Rng& rng, double sigma) { return std::normal_distribution<double>(0.0, sigma)(rng); }

// --- ridge patterns ---------------------------------------------------------

struct Spiral {
  double x, y;
  int sign;
};

/// Ridge phase field: elliptic rings around a core plus phase dislocations.
/// Every dislocation yields one ridge ending or bifurcation.
struct RidgePattern {
  double period = 6.0;
  double core_x = 0, core_y = -100;
  double ellipticity = 1.0;
  double phase0 = 0;
  std::vector<Spiral> spirals;

  double phase(double x, double y) const {
    const double dx = x - core_x, dy = y - core_y;
    double p = phase0 + 2 * std::numbers::pi / period * std::sqrt(dx * dx + ellipticity * dy * dy);
    for (const auto& s : spirals) p += s.sign * std::atan2(y - s.y, x - s.x);
    return p;
  }
  /// 1 on ridge crests, 0 in valleys.
  double ridge(double x, double y) const { return 0.5 * (1.0 + std::cos(phase(x, y))); }
};

/// Pattern centred on the origin, covering roughly [-w/2, w/2] x [-h/2, h/2].
inline RidgePattern random_pattern(Rng& rng, double w, double h, double period, int spirals) {
  RidgePattern p;
  p.period = period;
  p.core_x = uniform(rng, -0.25, 0.25) * w;
  p.core_y = uniform(rng, -1.2, 0.1) * h;
  p.ellipticity = uniform(rng, 0.4, 1.6);
  p.phase0 = uniform(rng, 0, 2 * std::numbers::pi);
  for (int i = 0; i < spirals; ++i) {
    p.spirals.push_back({uniform(rng, -0.55, 0.55) * w, uniform(rng, -0.55, 0.55) * h,
                         std::bernoulli_distribution(0.5)(rng) ? 1 : -1});
  }
  return p;
}

/// Rigid motion plus a smooth elastic displacement field.
struct Warp {
  double angle = 0;  // radians
  double tx = 0, ty = 0;
  double amplitude = 0;
  std::array<double, 4> kx{}, ky{}, px{}, py{};

  std::pair<double, double> apply(double x, double y) const {
    const double c = std::cos(angle), s = std::sin(angle);
    double u = c * x - s * y + tx, v = s * x + c * y + ty;
    if (amplitude > 0) {
      u += amplitude * std::sin(kx[0] * x + ky[0] * y + px[0]) + 0.5 * amplitude * std::sin(kx[1] * x + ky[1] * y + px[1]);
      v += amplitude * std::sin(kx[2] * x + ky[2] * y + px[2]) + 0.5 * amplitude * std::sin(kx[3] * x + ky[3] * y + px[3]);
    }
    return {u, v};
  }
};

inline Warp random_warp(Rng& rng, double max_angle_deg, double max_shift, double amplitude, double wavelength) {
  Warp w;
  w.angle = uniform(rng, -max_angle_deg, max_angle_deg) * std::numbers::pi / 180.0;
  w.tx = uniform(rng, -max_shift, max_shift);
  w.ty = uniform(rng, -max_shift, max_shift);
  w.amplitude = amplitude;
  for (int i = 0; i < 4; ++i) {
    const double dir = uniform(rng, 0, 2 * std::numbers::pi);
    const double k = 2 * std::numbers::pi / (wavelength * uniform(rng, 0.8, 1.25));
    w.kx[i] = k * std::cos(dir);
    w.ky[i] = k * std::sin(dir);
    w.px[i] = uniform(rng, 0, 2 * std::numbers::pi);
  }
  return w;
}

// --- filters ----------------------------------------------------------------

inline std::vector<double> gaussian_kernel(double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3 * sigma)));
  std::vector<double> k(2 * r + 1);
  double sum = 0;
  for (int i = -r; i <= r; ++i) sum += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& v : k) v /= sum;
  return k;
}

/// Separable Gaussian blur with replicated borders.
inline RasterImage gaussian_blur(const RasterImage& img, double sigma) {
  if (sigma <= 0) return img;
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int w = img.width, h = img.height, ch = img.channels;
  std::vector<double> tmp(img.pixels.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0;
        for (int i = -r; i <= r; ++i) acc += k[i + r] * img.at(std::clamp(x + i, 0, w - 1), y, c);
        tmp[(static_cast<std::size_t>(y) * w + x) * ch + c] = acc;
      }
  RasterImage out(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0;
        for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp[(static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x) * ch + c];
        out.at(x, y, c) = clamp_byte(acc);
      }
  return out;
}

inline ChannelImage gaussian_blur(const ChannelImage& img, double sigma) {
  return as_channel(gaussian_blur(as_raster(img), sigma));
}

// --- finger crops -----------------------------------------------------------

struct SkinTone {
  double r = 200, g = 140, b = 120;
};

inline constexpr SkinTone kSkin{};
inline constexpr std::array<double, 3> kBackground{40, 70, 150};

struct FingerRender {
  double ridge_depth = 0.32;  // relative darkening on ridge crests
  double noise_sigma = 3.0;
  double blur_sigma = 0.0;
};

/// Upright fingertip crop: a capsule spanning the full crop width with a
/// rounded top, textured by `pattern` seen through `warp`.
inline FingerCrop make_finger_crop(const RidgePattern& pattern, const Warp& warp, int width, int height, Rng& rng,
                                   const FingerRender& style = {}) {
  FingerCrop fc;
  fc.image = RasterImage(width, height, 3);
  fc.mask = BinaryMask(width, height);
  const double radius = width / 2.0;
  const double cx = width / 2.0, cy = height / 2.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      const bool inside = py >= radius || std::hypot(px - radius, py - radius) <= radius;
      fc.mask.set(x, y, inside);
      std::array<double, 3> rgb = kBackground;
      if (inside) {
        const auto [u, v] = warp.apply(px - cx, py - cy);
        const double f = 1.0 - style.ridge_depth * pattern.ridge(u, v);
        rgb = {kSkin.r * f, kSkin.g * f, kSkin.b * f};
      }
      for (int c = 0; c < 3; ++c) fc.image.at(x, y, c) = clamp_byte(rgb[c] + normal(rng, style.noise_sigma));
    }
  }
  if (style.blur_sigma > 0) fc.image = gaussian_blur(fc.image, style.blur_sigma);
  return fc;
}

/// Corpus identity: one master pattern per (subject, finger).
struct CorpusFinger {
  RidgePattern pattern;
};

inline constexpr int kCorpusCropWidth = 220;
inline constexpr int kCorpusCropHeight = 440;

inline CorpusFinger make_corpus_finger(Rng& rng) {
  return {random_pattern(rng, kCorpusCropWidth, kCorpusCropHeight, 6.0, 34)};
}

/// Session 1 renders the master pattern as is; later sessions add a small
/// rigid motion, elastic distortion and mild blur.
inline FingerCrop render_corpus_session(const CorpusFinger& f, int session, Rng& rng) {
  FingerRender style;
  Warp warp;
  if (session > 1) {
    warp = random_warp(rng, 4.0, 6.0, 1.5, 140.0);
    style.blur_sigma = 0.7;
  }
  return make_finger_crop(f.pattern, warp, kCorpusCropWidth, kCorpusCropHeight, rng, style);
}

// --- hand frames ------------------------------------------------------------

struct HandSpec {
  int frame_width = 960;
  int frame_height = 720;
  double finger_width = 56;          // middle finger
  double finger_length_ratio = 4.4;  // middle finger length / width
  double palm_visible = 0.7;         // visible palm length along the axis / middle finger length
  double rotation_deg = 0;           // CCW, visual
  double ridge_period = 4.0;
  double ridge_depth = 0.3;
  double noise_sigma = 4.0;
  double blur_sigma = 0.0;
  double spacing_jitter = 0.3;  // gap jitter, fraction of the nominal gap
  HandSide hand = HandSide::Right;
};

struct FingerTruth {
  int finger_id = 0;
  double base_x = 0, base_y = 0;  // frame coordinates of the finger base centre
  double tip_x = 0, tip_y = 0;    // frame coordinates of the fingertip
};

struct HandFrame {
  RasterImage image;
  std::vector<FingerTruth> fingers;  // upright left-to-right order
};

namespace detail {

struct FingerShape {
  double base_v, width, length, splay;  // hand coordinates, splay in radians toward +v
  RidgePattern pattern;
  int id;
};

inline double segment_distance(double px, double py, const FingerTruth& f) {
  const double vx = f.tip_x - f.base_x, vy = f.tip_y - f.base_y;
  const double t = std::clamp(((px - f.base_x) * vx + (py - f.base_y) * vy) / (vx * vx + vy * vy), 0.0, 1.0);
  return std::hypot(px - (f.base_x + t * vx), py - (f.base_y + t * vy));
}

}  // namespace detail

/// Finger whose axis passes closest to the frame point (x, y).
inline int nearest_finger_id(const HandFrame& frame, double x, double y) {
  int best = 0;
  double best_d = 1e300;
  for (const auto& f : frame.fingers) {
    const double d = detail::segment_distance(x, y, f);
    if (d < best_d) {
      best_d = d;
      best = f.finger_id;
    }
  }
  return best;
}

/// Hand seen palm-on with four extended fingers; the palm continues past the
/// frame border. Hand coordinates: u toward the fingertips, v to the right of
/// the upright view; the origin is the centre of the finger-base line.
inline HandFrame make_hand_frame(const HandSpec& spec, Rng& rng) {
  // Upright left-to-right order: right hand index..little, left hand little..index.
  const std::array<double, 4> len_right{0.90, 1.0, 0.93, 0.76}, wid_right{1.0, 1.02, 0.97, 0.85};
  const auto ids = finger_ids_for(spec.hand);
  std::array<double, 4> lens{}, wids{};
  for (int i = 0; i < 4; ++i) {
    const int k = spec.hand == HandSide::Right ? i : 3 - i;
    lens[i] = len_right[k] * spec.finger_length_ratio * spec.finger_width * uniform(rng, 0.96, 1.04);
    wids[i] = wid_right[k] * spec.finger_width * uniform(rng, 0.95, 1.05);
  }
  const double nominal_gap = 0.22 * spec.finger_width;
  std::array<double, 3> gaps{};
  for (auto& g : gaps) g = nominal_gap * (1.0 + uniform(rng, -spec.spacing_jitter, spec.spacing_jitter));
  double span = 0;
  for (double w : wids) span += w;
  for (double g : gaps) span += g;
  std::vector<detail::FingerShape> fingers;
  double v = -span / 2;
  for (int i = 0; i < 4; ++i) {
    const double splay = (i - 1.5) * uniform(rng, 0.02, 0.06);
    fingers.push_back({v + wids[i] / 2, wids[i], lens[i], splay,
                       random_pattern(rng, wids[i], lens[i], spec.ridge_period, 12), ids[i]});
    v += wids[i] + (i < 3 ? gaps[i] : 0);
  }
  const double palm_half = span / 2 + 0.12 * spec.finger_width;
  const double corner = 0.35 * spec.finger_width;

  // Place the hand on the axis through the frame centre, slid along the axis
  // so the longest visible stretch of palm equals the requested length.
  const double theta = spec.rotation_deg * std::numbers::pi / 180.0;
  // Unit vectors of +u and +v in frame coordinates (y down).
  const double ux = -std::sin(theta), uy = -std::cos(theta);
  const double vx = -uy, vy = ux;
  const double W = spec.frame_width, H = spec.frame_height;
  auto exit_distance = [&](double px, double py) {
    double t = 1e300;
    if (ux > 1e-12) t = std::min(t, px / ux);
    if (ux < -1e-12) t = std::min(t, (W - px) / -ux);
    if (uy > 1e-12) t = std::min(t, py / uy);
    if (uy < -1e-12) t = std::min(t, (H - py) / -uy);
    return t;
  };
  const double finger_len = spec.finger_length_ratio * spec.finger_width;
  double longest = 0, shortest = 1e300;
  for (int k = -8; k <= 8; ++k) {
    const double off = palm_half * k / 8.0;
    const double t = exit_distance(W / 2 + off * vx, H / 2 + off * vy);
    longest = std::max(longest, t);
    shortest = std::min(shortest, t);
  }
  // Keep the whole finger-base line inside the frame.
  const double slide = std::min(longest - spec.palm_visible * finger_len, shortest - 0.03 * finger_len);
  const double ox = W / 2 - slide * ux, oy = H / 2 - slide * uy;

  HandFrame out;
  for (const auto& f : fingers) {
    FingerTruth t;
    t.finger_id = f.id;
    auto to_frame = [&](double u, double vv) {
      return std::pair{ox + u * ux + vv * vx, oy + u * uy + vv * vy};
    };
    std::tie(t.base_x, t.base_y) = to_frame(0, f.base_v);
    std::tie(t.tip_x, t.tip_y) = to_frame(f.length * std::cos(f.splay), f.base_v + f.length * std::sin(f.splay));
    out.fingers.push_back(t);
  }

  const double sr = uniform(rng, 0.92, 1.08);
  const SkinTone skin{kSkin.r * sr, kSkin.g * sr, kSkin.b * sr};
  out.image = RasterImage(spec.frame_width, spec.frame_height, 3);
  for (int y = 0; y < spec.frame_height; ++y) {
    for (int x = 0; x < spec.frame_width; ++x) {
      const double dx = x + 0.5 - ox, dy = y + 0.5 - oy;
      const double u = dx * ux + dy * uy, vv = dx * vx + dy * vy;
      double ridge_f = -1;  // < 0: background
      if (u <= 0 && std::abs(vv) <= palm_half) {
        // Palm with rounded top corners.
        const double ex = std::abs(vv) - (palm_half - corner), ey = u + corner;
        if (ex <= 0 || ey <= 0 || ex * ex + ey * ey <= corner * corner) ridge_f = 0;
      }
      if (ridge_f < 0) {
        for (const auto& f : fingers) {
          const double c = std::cos(f.splay), s = std::sin(f.splay);
          const double along = u * c + (vv - f.base_v) * s, across = -u * s + (vv - f.base_v) * c;
          const double half = f.width / 2;
          const bool body = along >= -half && along <= f.length - half && std::abs(across) <= half;
          const bool tip = std::hypot(along - (f.length - half), across) <= half;
          if (body || tip) {
            ridge_f = f.pattern.ridge(across, along - f.length / 2);
            break;
          }
        }
      }
      std::array<double, 3> rgb = kBackground;
      if (ridge_f >= 0) {
        const double k = 1.0 - spec.ridge_depth * ridge_f;
        rgb = {skin.r * k, skin.g * k, skin.b * k};
      }
      for (int c = 0; c < 3; ++c) out.image.at(x, y, c) = clamp_byte(rgb[c] + normal(rng, spec.noise_sigma));
    }
  }
  if (spec.blur_sigma > 0) out.image = gaussian_blur(out.image, spec.blur_sigma);
  return out;
}

/// Geometry-test hand: random rotation over the full circle, jittered spacing.
inline HandSpec random_hand_spec(Rng& rng, HandSide hand) {
  HandSpec s;
  s.hand = hand;
  s.frame_width = 800;
  s.frame_height = 600;
  s.rotation_deg = uniform(rng, 0.0, 360.0);
  s.finger_width = uniform(rng, 52, 62);
  s.finger_length_ratio = uniform(rng, 3.8, 4.6);
  s.palm_visible = uniform(rng, 0.45, 0.7);
  return s;
}

/// Capture-scale hand: upright, fingers wide enough to pass the size checks.
inline HandSpec capture_hand_spec(HandSide hand, int frame_width = 1280, int frame_height = 720) {
  HandSpec s;
  s.hand = hand;
  s.frame_width = frame_width;
  s.frame_height = frame_height;
  s.finger_width = 235;
  s.finger_length_ratio = 2.4;
  s.palm_visible = 0.15;
  s.ridge_period = 5.6;
  s.ridge_depth = 0.32;
  s.noise_sigma = 3.0;
  return s;
}

/// Uniform background with sensor noise and no hand.
inline RasterImage background_frame(int width, int height, Rng& rng, double noise_sigma = 4.0) {
  RasterImage img(width, height, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = clamp_byte(kBackground[c] + normal(rng, noise_sigma));
  return img;
}

}  // namespace touchprint::synth
