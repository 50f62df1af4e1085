#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "touchprint/error.hpp"

namespace touchprint {

/// Interleaved 8-bit image with one (gray) or three (RGB) channels.
struct RasterImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  RasterImage() = default;
  RasterImage(int w, int h, int ch, std::uint8_t fill = 0)
      : width(w), height(h), channels(ch),
        pixels(static_cast<std::size_t>(w) * h * ch, fill) {
    if (w < 1 || h < 1) throw Error(ErrorCode::InvalidArgument, "image dimensions must be >= 1");
    if (ch != 1 && ch != 3) throw Error(ErrorCode::InvalidArgument, "channels must be 1 or 3");
  }

  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool operator==(const RasterImage&) const = default;
};

/// Single 8-bit plane (gray level, Cr, Hue, ...).
struct ChannelImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  ChannelImage() = default;
  ChannelImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  bool operator==(const ChannelImage&) const = default;
};

/// Foreground/background mask; each byte is 0 or 1.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h, bool fill = false)
      : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

  bool get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  /// Out-of-canvas reads are background.
  bool get_or_zero(int x, int y) const { return inside(x, y) && get(x, y); }

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
  }
  bool empty() const { return std::none_of(bits.begin(), bits.end(), [](auto b) { return b != 0; }); }
  bool operator==(const BinaryMask&) const = default;
};

inline ChannelImage as_channel(const RasterImage& img) {
  if (img.channels != 1) throw Error(ErrorCode::InvalidArgument, "expected a single-channel image");
  ChannelImage out;
  out.width = img.width;
  out.height = img.height;
  out.values = img.pixels;
  return out;
}

inline RasterImage as_raster(const ChannelImage& ch) {
  RasterImage out;
  out.width = ch.width;
  out.height = ch.height;
  out.channels = 1;
  out.pixels = ch.values;
  return out;
}

inline std::uint8_t clamp_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// --- colour conversion ----------------------------------------------------

inline ChannelImage to_grayscale(const RasterImage& img) {
  if (img.channels == 1) return as_channel(img);
  ChannelImage out(img.width, img.height);
  const std::size_t n = out.values.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = &img.pixels[i * 3];
    out.values[i] = clamp_byte(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]);
  }
  return out;
}

enum class ChannelKind { Cr, Hue };

/// Cr of ITU-R BT.601 full-range YCbCr.
inline std::uint8_t cr_of(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return clamp_byte(128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b);
}

/// HSV hue on a circular byte scale (256 steps per turn); achromatic pixels are 0.
inline std::uint8_t hue_of(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const int delta = mx - mn;
  if (delta == 0) return 0;
  double h;
  if (mx == r) {
    h = 60.0 * (static_cast<double>(g - b) / delta);
  } else if (mx == g) {
    h = 60.0 * (static_cast<double>(b - r) / delta) + 120.0;
  } else {
    h = 60.0 * (static_cast<double>(r - g) / delta) + 240.0;
  }
  if (h < 0) h += 360.0;
  return static_cast<std::uint8_t>(std::lround(h * 256.0 / 360.0) & 0xFF);
}

inline ChannelImage extract_channel(const RasterImage& img, ChannelKind kind) {
  if (img.channels != 3) throw Error(ErrorCode::GrayInput, "colour channel requested from a gray image");
  ChannelImage out(img.width, img.height);
  const std::size_t n = out.values.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = &img.pixels[i * 3];
    out.values[i] = kind == ChannelKind::Cr ? cr_of(p[0], p[1], p[2]) : hue_of(p[0], p[1], p[2]);
  }
  return out;
}

/// Linear map of [min, max] onto [0, 255]; constant images are returned as-is.
inline ChannelImage stretch_histogram(const ChannelImage& ch) {
  if (ch.values.empty()) return ch;
  const auto [lo_it, hi_it] = std::minmax_element(ch.values.begin(), ch.values.end());
  const int lo = *lo_it, hi = *hi_it;
  if (lo == hi || (lo == 0 && hi == 255)) return ch;
  std::array<std::uint8_t, 256> lut{};
  for (int v = lo; v <= hi; ++v) lut[v] = clamp_byte((v - lo) * 255.0 / (hi - lo));
  ChannelImage out = ch;
  for (auto& v : out.values) v = lut[v];
  return out;
}

// --- geometry ---------------------------------------------------------------

/// 2x3 affine map (x, y) -> (a x + b y + c, d x + e y + f).
struct Affine {
  double a = 1, b = 0, c = 0;
  double d = 0, e = 1, f = 0;

  std::array<double, 2> apply(double x, double y) const { return {a * x + b * y + c, d * x + e * y + f}; }

  /// this ∘ other (apply other first).
  Affine compose(const Affine& o) const {
    return {a * o.a + b * o.d, a * o.b + b * o.e, a * o.c + b * o.f + c,
            d * o.a + e * o.d, d * o.b + e * o.e, d * o.c + e * o.f + f};
  }
  Affine inverse() const {
    const double det = a * e - b * d;
    Affine r;
    r.a = e / det;
    r.b = -b / det;
    r.d = -d / det;
    r.e = a / det;
    r.c = -(r.a * c + r.b * f);
    r.f = -(r.d * c + r.e * f);
    return r;
  }
  static Affine translation(double tx, double ty) { return {1, 0, tx, 0, 1, ty}; }
};

enum class Interpolation { Nearest, Bilinear };

struct RotationGeometry {
  int out_width = 0;
  int out_height = 0;
  int quarter_turns = -1;  // 0..3 when the angle is an exact multiple of 90 degrees
  Affine forward;          // source pixel -> output pixel
};

/// Output canvas and mapping for a counter-clockwise (as displayed) rotation
/// about the image centre; the canvas is the bounding box of the rotated extent.
inline RotationGeometry rotation_geometry(int width, int height, double angle_ccw_deg) {
  RotationGeometry g;
  double turns = std::fmod(angle_ccw_deg, 360.0);
  if (turns < 0) turns += 360.0;
  const double q = turns / 90.0;
  const double qr = std::round(q);
  if (std::abs(q - qr) < 1e-9) g.quarter_turns = static_cast<int>(qr) % 4;

  double cs, sn;
  if (g.quarter_turns >= 0) {
    static constexpr int kCos[4] = {1, 0, -1, 0};
    static constexpr int kSin[4] = {0, 1, 0, -1};
    cs = kCos[g.quarter_turns];
    sn = kSin[g.quarter_turns];
  } else {
    const double rad = angle_ccw_deg * std::numbers::pi / 180.0;
    cs = std::cos(rad);
    sn = std::sin(rad);
  }
  const double ext_w = std::abs(width * cs) + std::abs(height * sn);
  const double ext_h = std::abs(width * sn) + std::abs(height * cs);
  g.out_width = std::max(1, static_cast<int>(std::ceil(ext_w - 1e-6)));
  g.out_height = std::max(1, static_cast<int>(std::ceil(ext_h - 1e-6)));

  const double cx = (width - 1) / 2.0, cy = (height - 1) / 2.0;
  const double ox = (g.out_width - 1) / 2.0, oy = (g.out_height - 1) / 2.0;
  // y grows downwards, so a visual CCW turn is x' = x cos + y sin, y' = -x sin + y cos.
  g.forward = Affine{cs, sn, 0, -sn, cs, 0};
  g.forward = Affine::translation(ox, oy).compose(g.forward).compose(Affine::translation(-cx, -cy));
  return g;
}

namespace detail {

inline std::vector<std::uint8_t> rotate_plane(std::span<const std::uint8_t> src, int w, int h, int ch,
                                              const RotationGeometry& g, Interpolation interp) {
  const int ow = g.out_width, oh = g.out_height;
  std::vector<std::uint8_t> dst(static_cast<std::size_t>(ow) * oh * ch, 0);
  if (g.quarter_turns >= 0) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        int nx, ny;
        switch (g.quarter_turns) {
          case 0: nx = x; ny = y; break;
          case 1: nx = y; ny = w - 1 - x; break;
          case 2: nx = w - 1 - x; ny = h - 1 - y; break;
          default: nx = h - 1 - y; ny = x; break;
        }
        const auto* s = &src[(static_cast<std::size_t>(y) * w + x) * ch];
        auto* d = &dst[(static_cast<std::size_t>(ny) * ow + nx) * ch];
        for (int c = 0; c < ch; ++c) d[c] = s[c];
      }
    }
    return dst;
  }
  const Affine inv = g.forward.inverse();
  for (int y = 0; y < oh; ++y) {
    double sx = inv.b * y + inv.c;
    double sy = inv.e * y + inv.f;
    for (int x = 0; x < ow; ++x, sx += inv.a, sy += inv.d) {
      auto* d = &dst[(static_cast<std::size_t>(y) * ow + x) * ch];
      if (interp == Interpolation::Nearest) {
        const long ix = std::lround(sx), iy = std::lround(sy);
        if (ix < 0 || iy < 0 || ix >= w || iy >= h) continue;
        const auto* s = &src[(static_cast<std::size_t>(iy) * w + ix) * ch];
        for (int c = 0; c < ch; ++c) d[c] = s[c];
      } else {
        if (sx < -0.5 || sy < -0.5 || sx > w - 0.5 || sy > h - 0.5) continue;
        const double fx = std::clamp(sx, 0.0, w - 1.0), fy = std::clamp(sy, 0.0, h - 1.0);
        const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
        const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
        const double ax = fx - x0, ay = fy - y0;
        for (int c = 0; c < ch; ++c) {
          const double v00 = src[(static_cast<std::size_t>(y0) * w + x0) * ch + c];
          const double v10 = src[(static_cast<std::size_t>(y0) * w + x1) * ch + c];
          const double v01 = src[(static_cast<std::size_t>(y1) * w + x0) * ch + c];
          const double v11 = src[(static_cast<std::size_t>(y1) * w + x1) * ch + c];
          const double top = v00 + (v10 - v00) * ax;
          const double bot = v01 + (v11 - v01) * ax;
          d[c] = clamp_byte(top + (bot - top) * ay);
        }
      }
    }
  }
  return dst;
}

inline std::vector<std::uint8_t> resize_plane(std::span<const std::uint8_t> src, int w, int h, int ch, int ow,
                                              int oh) {
  std::vector<std::uint8_t> dst(static_cast<std::size_t>(ow) * oh * ch);
  const double sx_scale = static_cast<double>(w) / ow;
  const double sy_scale = static_cast<double>(h) / oh;
  std::vector<int> x0s(ow), x1s(ow);
  std::vector<double> axs(ow);
  for (int x = 0; x < ow; ++x) {
    const double sx = std::clamp((x + 0.5) * sx_scale - 0.5, 0.0, w - 1.0);
    x0s[x] = static_cast<int>(sx);
    x1s[x] = std::min(x0s[x] + 1, w - 1);
    axs[x] = sx - x0s[x];
  }
  for (int y = 0; y < oh; ++y) {
    const double sy = std::clamp((y + 0.5) * sy_scale - 0.5, 0.0, h - 1.0);
    const int y0 = static_cast<int>(sy), y1 = std::min(y0 + 1, h - 1);
    const double ay = sy - y0;
    const auto* r0 = &src[static_cast<std::size_t>(y0) * w * ch];
    const auto* r1 = &src[static_cast<std::size_t>(y1) * w * ch];
    auto* d = &dst[static_cast<std::size_t>(y) * ow * ch];
    for (int x = 0; x < ow; ++x) {
      for (int c = 0; c < ch; ++c) {
        const double v00 = r0[x0s[x] * ch + c], v10 = r0[x1s[x] * ch + c];
        const double v01 = r1[x0s[x] * ch + c], v11 = r1[x1s[x] * ch + c];
        const double top = v00 + (v10 - v00) * axs[x];
        const double bot = v01 + (v11 - v01) * axs[x];
        d[x * ch + c] = clamp_byte(top + (bot - top) * ay);
      }
    }
  }
  return dst;
}

}  // namespace detail

inline RasterImage rotate_image(const RasterImage& img, double angle_ccw,
                                Interpolation interp = Interpolation::Bilinear) {
  if (!std::isfinite(angle_ccw)) throw Error(ErrorCode::InvalidArgument, "rotation angle must be finite");
  const auto g = rotation_geometry(img.width, img.height, angle_ccw);
  RasterImage out;
  out.width = g.out_width;
  out.height = g.out_height;
  out.channels = img.channels;
  out.pixels = detail::rotate_plane(img.pixels, img.width, img.height, img.channels, g, interp);
  return out;
}

inline ChannelImage rotate_image(const ChannelImage& img, double angle_ccw,
                                 Interpolation interp = Interpolation::Bilinear) {
  if (!std::isfinite(angle_ccw)) throw Error(ErrorCode::InvalidArgument, "rotation angle must be finite");
  const auto g = rotation_geometry(img.width, img.height, angle_ccw);
  ChannelImage out;
  out.width = g.out_width;
  out.height = g.out_height;
  out.values = detail::rotate_plane(img.values, img.width, img.height, 1, g, interp);
  return out;
}

/// Masks always rotate with nearest-neighbour sampling.
inline BinaryMask rotate_image(const BinaryMask& mask, double angle_ccw,
                               Interpolation = Interpolation::Nearest) {
  if (!std::isfinite(angle_ccw)) throw Error(ErrorCode::InvalidArgument, "rotation angle must be finite");
  const auto g = rotation_geometry(mask.width, mask.height, angle_ccw);
  BinaryMask out;
  out.width = g.out_width;
  out.height = g.out_height;
  out.bits = detail::rotate_plane(mask.bits, mask.width, mask.height, 1, g, Interpolation::Nearest);
  return out;
}

inline int scaled_height(int width, int height, int target_width) {
  return std::max(1, static_cast<int>(std::lround(static_cast<double>(height) * target_width / width)));
}

inline RasterImage resize_to_width(const RasterImage& img, int target_width) {
  if (target_width < 1) throw Error(ErrorCode::InvalidArgument, "target width must be >= 1");
  const int oh = scaled_height(img.width, img.height, target_width);
  if (target_width == img.width && oh == img.height) return img;
  RasterImage out;
  out.width = target_width;
  out.height = oh;
  out.channels = img.channels;
  out.pixels = detail::resize_plane(img.pixels, img.width, img.height, img.channels, target_width, oh);
  return out;
}

inline ChannelImage resize_to_width(const ChannelImage& img, int target_width) {
  return as_channel(resize_to_width(as_raster(img), target_width));
}

/// Nearest-neighbour resize of a mask to an explicit size.
inline BinaryMask resize_mask(const BinaryMask& mask, int width, int height) {
  BinaryMask out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(mask.height - 1, static_cast<int>((y + 0.5) * mask.height / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(mask.width - 1, static_cast<int>((x + 0.5) * mask.width / width));
      out.set(x, y, mask.get(sx, sy));
    }
  }
  return out;
}

// --- crops ------------------------------------------------------------------

struct Rect {
  int x = 0, y = 0, width = 0, height = 0;
  bool empty() const { return width <= 0 || height <= 0; }
  int area() const { return width * height; }
  bool operator==(const Rect&) const = default;
};

inline Rect bounding_box(const BinaryMask& mask) {
  int x0 = mask.width, y0 = mask.height, x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height; ++y) {
    const auto* row = &mask.bits[static_cast<std::size_t>(y) * mask.width];
    for (int x = 0; x < mask.width; ++x) {
      if (row[x]) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
  }
  if (x1 < 0) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

inline RasterImage crop(const RasterImage& img, const Rect& r) {
  RasterImage out(r.width, r.height, img.channels);
  for (int y = 0; y < r.height; ++y) {
    std::copy_n(&img.pixels[(static_cast<std::size_t>(r.y + y) * img.width + r.x) * img.channels],
                static_cast<std::size_t>(r.width) * img.channels,
                &out.pixels[static_cast<std::size_t>(y) * r.width * img.channels]);
  }
  return out;
}

inline ChannelImage crop(const ChannelImage& img, const Rect& r) { return as_channel(crop(as_raster(img), r)); }

inline BinaryMask crop(const BinaryMask& mask, const Rect& r) {
  BinaryMask out(r.width, r.height);
  for (int y = 0; y < r.height; ++y) {
    std::copy_n(&mask.bits[static_cast<std::size_t>(r.y + y) * mask.width + r.x], r.width,
                &out.bits[static_cast<std::size_t>(y) * r.width]);
  }
  return out;
}

}  // namespace touchprint
