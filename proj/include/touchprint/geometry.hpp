#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "touchprint/raster.hpp"
#include "touchprint/segmentation.hpp"

namespace touchprint {

enum class HandSide { Left, Right };

constexpr std::string_view to_string(HandSide h) { return h == HandSide::Left ? "left" : "right"; }

struct GeometryConfig {
  double trim_step = 0.04;         // fraction of the upright hand height removed per retry
  double max_trim = 0.60;          // total trimming budget, fraction of height
  double finger_min_fraction = 0.02;  // dominant finger component, fraction of current image area
  double max_fine_angle = 45.0;    // larger per-finger corrections are treated as unreliable
  double max_tilt_angle = 80.0;    // hand-axis corrections beyond this are ignored
  double min_axis_coherence = 0.2;  // hand-axis correction needs this edge coherence
  int expected_fingers = 4;
};

/// One separated finger. `to_frame` maps crop pixel coordinates back into the
/// coordinates of the original camera frame.
struct FingerCrop {
  RasterImage image;
  BinaryMask mask;
  int order_index = 0;
  Affine to_frame;
};

/// Image + mask + provenance, the unit passed between geometric steps.
struct MaskedImage {
  RasterImage image;
  BinaryMask mask;
  Affine to_frame;
};

// --- coarse rotation --------------------------------------------------------

/// Rotation (CCW, degrees) that brings the border strip with the most
/// foreground to the bottom. Ties prefer bottom, left, top, right.
inline int coarse_rotation_angle(const BinaryMask& mask) {
  if (mask.empty()) throw Error(ErrorCode::EmptyMask, "coarse rotation on an empty mask");
  std::size_t top = 0, bottom = 0, left = 0, right = 0;
  for (int x = 0; x < mask.width; ++x) {
    top += mask.get(x, 0);
    bottom += mask.get(x, mask.height - 1);
  }
  for (int y = 0; y < mask.height; ++y) {
    left += mask.get(0, y);
    right += mask.get(mask.width - 1, y);
  }
  const std::array<std::pair<std::size_t, int>, 4> votes{{{bottom, 0}, {left, 90}, {top, 180}, {right, 270}}};
  auto best = votes[0];
  for (const auto& v : votes)
    if (v.first > best.first) best = v;
  return best.second;
}

inline MaskedImage rotate_masked(const MaskedImage& in, double angle_ccw) {
  if (std::abs(angle_ccw) < 1e-12) return in;
  const auto g = rotation_geometry(in.image.width, in.image.height, angle_ccw);
  MaskedImage out;
  out.image = rotate_image(in.image, angle_ccw, Interpolation::Bilinear);
  out.mask = rotate_image(in.mask, angle_ccw);
  out.to_frame = in.to_frame.compose(g.forward.inverse());
  return out;
}

inline MaskedImage crop_masked(const MaskedImage& in, const Rect& r) {
  MaskedImage out;
  out.image = crop(in.image, r);
  out.mask = crop(in.mask, r);
  out.to_frame = in.to_frame.compose(Affine::translation(r.x, r.y));
  return out;
}

inline MaskedImage crop_to_mask(const MaskedImage& in) {
  const Rect r = bounding_box(in.mask);
  if (r.empty()) throw Error(ErrorCode::EmptyMask, "nothing left to crop");
  return crop_masked(in, r);
}

/// Dominant boundary direction of the mask (structure tensor of its edges),
/// returned as the CCW rotation in (-90, 90] that makes it vertical. Finger
/// sides dominate a hand outline. Returns 0 when the edges are incoherent.
inline double edge_axis_correction(const BinaryMask& mask, double min_coherence = 0.2) {
  const int w = mask.width, h = mask.height;
  auto px = [&](int x, int y) { return static_cast<double>(mask.get(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1))); };
  double sxx = 0, syy = 0, sxy = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const double gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      sxx += gx * gx;
      syy += gy * gy;
      sxy += gx * gy;
    }
  }
  const double tr = sxx + syy;
  if (tr <= 0) return 0.0;
  if (std::sqrt((sxx - syy) * (sxx - syy) + 4 * sxy * sxy) / tr < min_coherence) return 0.0;
  // Edges run perpendicular to the dominant gradient (image coordinates, y down).
  const double edge = 0.5 * std::atan2(2 * sxy, sxx - syy) + std::numbers::pi / 2;
  const double visual = -edge * 180.0 / std::numbers::pi;
  double corr = std::fmod(90.0 - visual, 180.0);
  if (corr <= -90.0) corr += 180.0;
  if (corr > 90.0) corr -= 180.0;
  return corr;
}

// --- finger separation -------------------------------------------------------

/// Removes rows from the bottom until exactly `expected` dominant components
/// remain, then returns one bbox crop per component, left to right.
inline std::vector<FingerCrop> separate_fingers(const RasterImage& img, const BinaryMask& mask, int expected,
                                                const GeometryConfig& cfg = {}, const Affine& to_frame = {}) {
  if (img.width != mask.width || img.height != mask.height) {
    throw Error(ErrorCode::InvalidArgument, "image and mask sizes differ");
  }
  const int h = mask.height;
  const int step = std::max(1, static_cast<int>(std::lround(cfg.trim_step * h)));
  const int budget = static_cast<int>(std::floor(cfg.max_trim * h));
  for (int trimmed = 0; trimmed <= budget && trimmed < h; trimmed += step) {
    const Rect keep{0, 0, mask.width, h - trimmed};
    const BinaryMask part = trimmed == 0 ? mask : crop(mask, keep);
    const ComponentSet cs = connected_components(part);
    const auto dom = dominant_components(cs, cfg.finger_min_fraction);
    if (static_cast<int>(dom.size()) > expected) {
      throw Error(ErrorCode::DiscardFrame, std::to_string(dom.size()) + " dominant components, expected " +
                                               std::to_string(expected));
    }
    if (static_cast<int>(dom.size()) < expected) continue;

    std::vector<const Component*> ordered(dom.begin(), dom.end());
    std::stable_sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->cx < b->cx; });
    std::vector<FingerCrop> out;
    out.reserve(ordered.size());
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      const Component& c = *ordered[i];
      FingerCrop fc;
      fc.image = crop(img, c.bbox);
      fc.mask = BinaryMask(c.bbox.width, c.bbox.height);
      for (int y = 0; y < c.bbox.height; ++y)
        for (int x = 0; x < c.bbox.width; ++x)
          fc.mask.set(x, y, cs.labels[static_cast<std::size_t>(c.bbox.y + y) * cs.width + c.bbox.x + x] == c.id);
      fc.order_index = static_cast<int>(i);
      fc.to_frame = to_frame.compose(Affine::translation(c.bbox.x, c.bbox.y));
      out.push_back(std::move(fc));
    }
    return out;
  }
  throw Error(ErrorCode::SeparationFailed, "trim budget exhausted before " + std::to_string(expected) +
                                               " fingers separated");
}

// --- fine rotation ----------------------------------------------------------

struct Point2 {
  double x = 0, y = 0;
};

/// Andrew's monotone chain; returns the hull counter-clockwise in (x, y) order
/// without repeating the first point.
inline std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
              return a.x == b.x && a.y == b.y;
            }),
            pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

/// Hull of the pixel squares (not centres) of the mask's foreground.
inline std::vector<Point2> mask_hull(const BinaryMask& mask) {
  std::vector<Point2> pts;
  for (int y = 0; y < mask.height; ++y) {
    int lo = -1, hi = -1;
    for (int x = 0; x < mask.width; ++x)
      if (mask.get(x, y)) {
        if (lo < 0) lo = x;
        hi = x;
      }
    if (lo < 0) continue;
    for (int x : {lo, hi + 1}) {
      pts.push_back({static_cast<double>(x), static_cast<double>(y)});
      pts.push_back({static_cast<double>(x), static_cast<double>(y + 1)});
    }
  }
  return convex_hull(std::move(pts));
}

struct OrientedRect {
  double long_side = 0, short_side = 0;
  double long_dir_x = 0, long_dir_y = 1;  // unit vector in image coordinates
};

/// Minimum-area enclosing rectangle via rotating calipers over the hull edges.
inline OrientedRect min_area_rect(const std::vector<Point2>& hull) {
  OrientedRect best;
  if (hull.size() < 2) return best;
  double best_area = std::numeric_limits<double>::infinity();
  double best_tilt = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point2& a = hull[i];
    const Point2& b = hull[(i + 1) % hull.size()];
    double ux = b.x - a.x, uy = b.y - a.y;
    const double len = std::hypot(ux, uy);
    if (len == 0) continue;
    ux /= len;
    uy /= len;
    const double vx = -uy, vy = ux;
    double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
    for (const auto& p : hull) {
      const double pu = p.x * ux + p.y * uy, pv = p.x * vx + p.y * vy;
      umin = std::min(umin, pu);
      umax = std::max(umax, pu);
      vmin = std::min(vmin, pv);
      vmax = std::max(vmax, pv);
    }
    const double lu = umax - umin, lv = vmax - vmin;
    const double area = lu * lv;
    OrientedRect r;
    if (lu >= lv) {
      r = {lu, lv, ux, uy};
    } else {
      r = {lv, lu, vx, vy};
    }
    // Tilt of the long side away from vertical; used to break exact ties.
    const double tilt = std::abs(r.long_dir_x);
    const double tol = 1e-9 * std::max(1.0, best_area);
    if (area < best_area - tol || (std::abs(area - best_area) <= tol && tilt < best_tilt)) {
      best_area = area;
      best_tilt = tilt;
      best = r;
    }
  }
  return best;
}

/// CCW rotation in (-90, 90] that makes the long side of the minimum-area
/// rectangle vertical; squares give 0.
inline double fine_rotation_angle(const BinaryMask& finger_mask) {
  if (finger_mask.empty()) throw Error(ErrorCode::EmptyMask, "fine rotation on an empty mask");
  const auto hull = mask_hull(finger_mask);
  const OrientedRect r = min_area_rect(hull);
  if (r.long_side - r.short_side <= 1e-9 * std::max(1.0, r.long_side)) return 0.0;
  const double visual = std::atan2(-r.long_dir_y, r.long_dir_x) * 180.0 / std::numbers::pi;
  double corr = std::fmod(90.0 - visual, 180.0);
  if (corr <= -90.0) corr += 180.0;
  if (corr > 90.0) corr -= 180.0;
  if (std::abs(corr) < 1e-9) corr = 0.0;
  return corr;
}

/// Rotates a finger crop upright and re-crops it to its (largest) component.
inline FingerCrop upright_finger(const FingerCrop& in, const GeometryConfig& cfg = {}) {
  const double angle = fine_rotation_angle(in.mask);
  if (std::abs(angle) > cfg.max_fine_angle || angle == 0.0) return in;
  MaskedImage m{in.image, in.mask, in.to_frame};
  m = rotate_masked(m, angle);
  m.mask = largest_component(m.mask);
  m = crop_to_mask(m);
  FingerCrop out;
  out.image = std::move(m.image);
  out.mask = std::move(m.mask);
  out.order_index = in.order_index;
  out.to_frame = m.to_frame;
  return out;
}

// --- fingertip --------------------------------------------------------------

/// Keeps at most the top 2 x width rows.
inline FingerCrop crop_fingertip(const FingerCrop& finger) {
  const int w = finger.image.width;
  if (finger.image.height <= 2 * w) return finger;
  const Rect r{0, 0, w, 2 * w};
  FingerCrop out;
  out.image = crop(finger.image, r);
  out.mask = crop(finger.mask, r);
  out.order_index = finger.order_index;
  out.to_frame = finger.to_frame;
  return out;
}

// --- finger ids -------------------------------------------------------------

/// ISO/IEC 19794-4 finger positions for four crops ordered left to right.
inline std::vector<int> assign_finger_ids(std::size_t crop_count, HandSide hand) {
  if (crop_count != 4) {
    throw Error(ErrorCode::WrongFingerCount, "expected 4 finger crops, got " + std::to_string(crop_count));
  }
  if (hand == HandSide::Right) return {2, 3, 4, 5};
  return {10, 9, 8, 7};
}

inline std::vector<int> assign_finger_ids(const std::vector<FingerCrop>& crops, HandSide hand) {
  return assign_finger_ids(crops.size(), hand);
}

inline std::array<int, 4> finger_ids_for(HandSide hand) {
  const auto v = assign_finger_ids(4, hand);
  return {v[0], v[1], v[2], v[3]};
}

}  // namespace touchprint
