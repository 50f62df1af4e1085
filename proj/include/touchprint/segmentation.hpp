#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "touchprint/morphology.hpp"
#include "touchprint/raster.hpp"

namespace touchprint {

struct SegmentationConfig {
  double min_component_fraction = 0.02;  // "dominant" component, fraction of frame area
  int max_components = 4;                // one hand area up to four finger areas
  double min_fill = 0.10;                // combined dominant area, fraction of frame
  double max_fill = 0.90;
  double min_aspect = 0.15;  // bbox width / height
  double max_aspect = 8.0;
  double min_fill_ratio = 0.3;  // component area / bbox area
  int cr_floor = 133;           // absolute Cr gate applied after the Otsu split
  int hue_tolerance = 36;       // skin band half-width around red, in 1/256 turns (~50 deg)
  int hue_shift = 128;          // rotates the hue circle so red sits mid-range
};

// --- Otsu -----------------------------------------------------------------

using Histogram = std::array<std::uint64_t, 256>;

inline Histogram histogram_of(const ChannelImage& ch) {
  Histogram h{};
  for (auto v : ch.values) ++h[v];
  return h;
}

/// Threshold maximising between-class variance, class A = bins <= t.
/// Ties resolve to the smallest t.
inline std::uint8_t otsu_threshold(std::span<const std::uint64_t, 256> hist) {
  long double total = 0, total_sum = 0;
  for (int i = 0; i < 256; ++i) {
    total += hist[i];
    total_sum += static_cast<long double>(hist[i]) * i;
  }
  if (total == 0) throw Error(ErrorCode::EmptyHistogram, "histogram has no samples");

  // Integer class statistics keep the objective reproducible bit-for-bit
  // regardless of how they are accumulated.
  std::uint64_t n0 = 0;
  unsigned __int128 s0 = 0;
  long double best = 0;
  int best_t = 0;
  for (int t = 0; t < 256; ++t) {
    n0 += hist[t];
    s0 += static_cast<unsigned __int128>(hist[t]) * static_cast<unsigned>(t);
    const long double n1 = total - static_cast<long double>(n0);
    if (n0 == 0 || n1 == 0) continue;
    const long double diff = total * static_cast<long double>(s0) - static_cast<long double>(n0) * total_sum;
    const long double score = diff * diff / (static_cast<long double>(n0) * n1);
    if (score > best) {
      best = score;
      best_t = t;
    }
  }
  return static_cast<std::uint8_t>(best_t);
}

inline std::uint8_t otsu_threshold(const Histogram& hist) {
  return otsu_threshold(std::span<const std::uint64_t, 256>(hist));
}

// --- hand segmentation ----------------------------------------------------

namespace detail {

inline std::uint8_t stretched_value(const ChannelImage& original, std::uint8_t v) {
  const auto [lo_it, hi_it] = std::minmax_element(original.values.begin(), original.values.end());
  const int lo = *lo_it, hi = *hi_it;
  if (lo == hi) return v;
  return clamp_byte((static_cast<int>(v) - lo) * 255.0 / (hi - lo));
}

}  // namespace detail

/// Skin mask from the Cr and Hue channels, each split with Otsu after a
/// histogram stretch; the two channel masks are AND-ed and cleaned with a
/// 3x3 open and close.
inline BinaryMask segment_hand(const RasterImage& img, const SegmentationConfig& cfg = {}) {
  if (img.channels != 3) throw Error(ErrorCode::GrayInput, "hand segmentation needs a colour frame");
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;

  const ChannelImage cr = extract_channel(img, ChannelKind::Cr);
  const ChannelImage cr_st = stretch_histogram(cr);
  const std::uint8_t cr_t = otsu_threshold(histogram_of(cr_st));

  const ChannelImage hue = extract_channel(img, ChannelKind::Hue);
  ChannelImage shifted = hue;
  for (auto& v : shifted.values) v = static_cast<std::uint8_t>((v + cfg.hue_shift) & 0xFF);
  const ChannelImage hue_st = stretch_histogram(shifted);
  const std::uint8_t hue_t = otsu_threshold(histogram_of(hue_st));
  // The skin band is the Otsu class that contains pure red.
  const bool red_above = detail::stretched_value(shifted, static_cast<std::uint8_t>(cfg.hue_shift & 0xFF)) > hue_t;

  BinaryMask mask(img.width, img.height);
  for (std::size_t i = 0; i < n; ++i) {
    const bool cr_fg = cr_st.values[i] > cr_t && cr.values[i] >= cfg.cr_floor;
    const int h = hue.values[i];
    const int circ = std::min(h, 256 - h);
    const bool hue_fg = ((hue_st.values[i] > hue_t) == red_above) && circ <= cfg.hue_tolerance;
    mask.bits[i] = (cr_fg && hue_fg) ? 1 : 0;
  }
  return morph::close3(morph::open3(mask));
}

// --- connected components -------------------------------------------------

enum BorderSide : std::uint8_t {
  kTop = 1,
  kBottom = 2,
  kLeft = 4,
  kRight = 8,
};

struct Component {
  int id = 0;
  std::size_t area = 0;
  Rect bbox;
  double cx = 0, cy = 0;
  std::uint8_t border_touch = 0;  // BorderSide bits
};

struct ComponentSet {
  int width = 0;
  int height = 0;
  std::vector<int> labels;  // 0 = background
  std::vector<Component> components;

  std::size_t frame_area() const { return static_cast<std::size_t>(width) * height; }

  BinaryMask mask_of(int id) const {
    BinaryMask m(width, height);
    for (std::size_t i = 0; i < labels.size(); ++i) m.bits[i] = labels[i] == id ? 1 : 0;
    return m;
  }
};

/// 8-connected labelling. Ids are dense from 1, ordered by area (descending),
/// then by bbox top, then bbox left.
inline ComponentSet connected_components(const BinaryMask& mask) {
  ComponentSet cs;
  cs.width = mask.width;
  cs.height = mask.height;
  cs.labels.assign(mask.bits.size(), 0);
  std::vector<Component> raw;
  std::vector<int> stack;
  const int w = mask.width, h = mask.height;

  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const std::size_t start = static_cast<std::size_t>(y0) * w + x0;
      if (!mask.bits[start] || cs.labels[start] != 0) continue;
      const int label = static_cast<int>(raw.size()) + 1;
      Component c;
      int minx = x0, maxx = x0, miny = y0, maxy = y0;
      double sx = 0, sy = 0;
      cs.labels[start] = label;
      stack.push_back(static_cast<int>(start));
      while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        const int x = p % w, y = p / w;
        ++c.area;
        sx += x;
        sy += y;
        minx = std::min(minx, x);
        maxx = std::max(maxx, x);
        miny = std::min(miny, y);
        maxy = std::max(maxy, y);
        for (int dy = -1; dy <= 1; ++dy) {
          const int ny = y + dy;
          if (ny < 0 || ny >= h) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx;
            if (nx < 0 || nx >= w) continue;
            const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
            if (mask.bits[q] && cs.labels[q] == 0) {
              cs.labels[q] = label;
              stack.push_back(static_cast<int>(q));
            }
          }
        }
      }
      c.id = label;
      c.bbox = {minx, miny, maxx - minx + 1, maxy - miny + 1};
      c.cx = sx / static_cast<double>(c.area);
      c.cy = sy / static_cast<double>(c.area);
      if (miny == 0) c.border_touch |= kTop;
      if (maxy == h - 1) c.border_touch |= kBottom;
      if (minx == 0) c.border_touch |= kLeft;
      if (maxx == w - 1) c.border_touch |= kRight;
      raw.push_back(c);
    }
  }

  std::vector<int> order(raw.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (raw[a].area != raw[b].area) return raw[a].area > raw[b].area;
    if (raw[a].bbox.y != raw[b].bbox.y) return raw[a].bbox.y < raw[b].bbox.y;
    return raw[a].bbox.x < raw[b].bbox.x;
  });
  std::vector<int> remap(raw.size() + 1, 0);
  cs.components.reserve(raw.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    Component c = raw[order[i]];
    remap[c.id] = static_cast<int>(i) + 1;
    c.id = static_cast<int>(i) + 1;
    cs.components.push_back(c);
  }
  for (auto& l : cs.labels) l = remap[l];
  return cs;
}

/// Keeps the largest component only (empty mask stays empty).
inline BinaryMask largest_component(const BinaryMask& mask) {
  const auto cs = connected_components(mask);
  if (cs.components.empty()) return mask;
  return cs.mask_of(1);
}

// --- plausibility ---------------------------------------------------------

enum class MaskReason { Ok, TooManyComponents, NoComponent, BadShape, BadSize, BadPosition };

constexpr std::string_view to_string(MaskReason r) {
  switch (r) {
    case MaskReason::Ok: return "Ok";
    case MaskReason::TooManyComponents: return "TooManyComponents";
    case MaskReason::NoComponent: return "NoComponent";
    case MaskReason::BadShape: return "BadShape";
    case MaskReason::BadSize: return "BadSize";
    case MaskReason::BadPosition: return "BadPosition";
  }
  return "Unknown";
}

struct MaskVerdict {
  bool pass = false;
  MaskReason reason = MaskReason::NoComponent;
};

inline std::vector<const Component*> dominant_components(const ComponentSet& cs, double min_fraction) {
  std::vector<const Component*> out;
  const double min_area = min_fraction * static_cast<double>(cs.frame_area());
  for (const auto& c : cs.components)
    if (static_cast<double>(c.area) >= min_area) out.push_back(&c);
  return out;
}

inline MaskVerdict check_mask_plausibility(const ComponentSet& cs, const SegmentationConfig& cfg = {}) {
  auto fail = [](MaskReason r) { return MaskVerdict{false, r}; };
  const auto dom = dominant_components(cs, cfg.min_component_fraction);
  if (static_cast<int>(dom.size()) > cfg.max_components) return fail(MaskReason::TooManyComponents);
  if (dom.empty()) return fail(MaskReason::NoComponent);

  for (const auto* c : dom) {
    const double aspect = static_cast<double>(c->bbox.width) / c->bbox.height;
    const double fill = static_cast<double>(c->area) / c->bbox.area();
    if (aspect < cfg.min_aspect || aspect > cfg.max_aspect || fill < cfg.min_fill_ratio) {
      return fail(MaskReason::BadShape);
    }
  }
  double total = 0;
  for (const auto* c : dom) total += static_cast<double>(c->area);
  const double frac = total / static_cast<double>(cs.frame_area());
  if (frac < cfg.min_fill || frac > cfg.max_fill) return fail(MaskReason::BadSize);

  std::uint8_t common = kTop | kBottom | kLeft | kRight;
  for (const auto* c : dom) common &= c->border_touch;
  if (common == 0) return fail(MaskReason::BadPosition);
  return {true, MaskReason::Ok};
}

}  // namespace touchprint
