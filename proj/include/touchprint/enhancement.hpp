#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "touchprint/geometry.hpp"
#include "touchprint/morphology.hpp"
#include "touchprint/raster.hpp"

namespace touchprint {

struct EnhancementConfig {
  double clahe_clip = 2.0;
  int clahe_tiles_x = 8;
  int clahe_tiles_y = 8;
  int border_px = 15;
  int norm_width = 300;
};

/// Touch-equivalent fingerprint: normalised width, zero outside the ROI.
struct FingerprintImage {
  ChannelImage gray;
  BinaryMask roi;            // same size as gray
  int source_finger_id = 0;  // ISO/IEC 19794-4 position, 0 when unknown
  int roi_width = 0;         // ROI extent before width normalisation
  int roi_height = 0;

  double roi_fill() const {
    return gray.values.empty() ? 0.0 : static_cast<double>(roi.count()) / static_cast<double>(gray.values.size());
  }
};

// --- CLAHE ------------------------------------------------------------------

using ToneMap = std::array<std::uint8_t, 256>;

struct ClaheTiles {
  int tiles_x = 1, tiles_y = 1;
  int tile_w = 1, tile_h = 1;
  std::vector<ToneMap> luts;  // row-major tiles
};

/// Clipped-histogram equalisation mapping for one tile. Tiles holding a
/// single grey level map to the identity.
inline ToneMap clahe_tile_lut(const std::array<std::uint32_t, 256>& hist_in, std::uint32_t pixels,
                              double clip_limit) {
  ToneMap lut{};
  int occupied = 0;
  for (auto c : hist_in) occupied += c != 0;
  if (occupied <= 1 || pixels == 0) {
    for (int i = 0; i < 256; ++i) lut[i] = static_cast<std::uint8_t>(i);
    return lut;
  }
  // Real-valued clip limit: truncating it to whole counts flattens small
  // tiles far below the requested contrast limit.
  std::array<double, 256> hist{};
  const double limit = std::max(1.0, clip_limit * pixels / 256.0);
  double excess = 0;
  for (int i = 0; i < 256; ++i) {
    hist[i] = std::min<double>(hist_in[i], limit);
    excess += hist_in[i] - hist[i];
  }
  const double bonus = excess / 256.0;
  const double scale = 255.0 / pixels;
  double sum = 0;
  for (int i = 0; i < 256; ++i) {
    sum += hist[i] + bonus;
    lut[i] = clamp_byte(sum * scale);
  }
  return lut;
}

inline ClaheTiles clahe_tiles(const ChannelImage& gray, double clip_limit, int tiles_x, int tiles_y) {
  ClaheTiles t;
  t.tiles_x = std::clamp(tiles_x, 1, gray.width);
  t.tiles_y = std::clamp(tiles_y, 1, gray.height);
  t.tile_w = (gray.width + t.tiles_x - 1) / t.tiles_x;
  t.tile_h = (gray.height + t.tiles_y - 1) / t.tiles_y;
  t.tiles_x = (gray.width + t.tile_w - 1) / t.tile_w;
  t.tiles_y = (gray.height + t.tile_h - 1) / t.tile_h;
  t.luts.resize(static_cast<std::size_t>(t.tiles_x) * t.tiles_y);
  for (int ty = 0; ty < t.tiles_y; ++ty) {
    for (int tx = 0; tx < t.tiles_x; ++tx) {
      std::array<std::uint32_t, 256> hist{};
      std::uint32_t n = 0;
      const int x1 = std::min(gray.width, (tx + 1) * t.tile_w);
      const int y1 = std::min(gray.height, (ty + 1) * t.tile_h);
      for (int y = ty * t.tile_h; y < y1; ++y)
        for (int x = tx * t.tile_w; x < x1; ++x) {
          ++hist[gray.at(x, y)];
          ++n;
        }
      t.luts[static_cast<std::size_t>(ty) * t.tiles_x + tx] = clahe_tile_lut(hist, n, clip_limit);
    }
  }
  return t;
}

/// Contrast limited adaptive histogram equalisation with bilinear blending of
/// the per-tile mappings between tile centres.
inline ChannelImage apply_clahe(const ChannelImage& gray, double clip_limit = 2.0, int tiles_x = 8,
                                int tiles_y = 8) {
  if (clip_limit < 1.0) throw Error(ErrorCode::InvalidArgument, "CLAHE clip limit must be >= 1");
  if (tiles_x < 1 || tiles_y < 1) throw Error(ErrorCode::InvalidArgument, "CLAHE needs at least one tile");
  if (gray.values.empty()) return gray;
  const ClaheTiles t = clahe_tiles(gray, clip_limit, tiles_x, tiles_y);
  ChannelImage out(gray.width, gray.height);

  std::vector<int> tx0(gray.width), tx1(gray.width);
  std::vector<double> ax(gray.width);
  for (int x = 0; x < gray.width; ++x) {
    const double fx = (x + 0.5) / t.tile_w - 0.5;
    const int i0 = static_cast<int>(std::floor(fx));
    ax[x] = fx - i0;
    tx0[x] = std::clamp(i0, 0, t.tiles_x - 1);
    tx1[x] = std::clamp(i0 + 1, 0, t.tiles_x - 1);
  }
  for (int y = 0; y < gray.height; ++y) {
    const double fy = (y + 0.5) / t.tile_h - 0.5;
    const int j0 = static_cast<int>(std::floor(fy));
    const double ay = fy - j0;
    const int ty0 = std::clamp(j0, 0, t.tiles_y - 1), ty1 = std::clamp(j0 + 1, 0, t.tiles_y - 1);
    const ToneMap* row0 = &t.luts[static_cast<std::size_t>(ty0) * t.tiles_x];
    const ToneMap* row1 = &t.luts[static_cast<std::size_t>(ty1) * t.tiles_x];
    for (int x = 0; x < gray.width; ++x) {
      const int v = gray.at(x, y);
      const double top = row0[tx0[x]][v] + (row0[tx1[x]][v] - static_cast<double>(row0[tx0[x]][v])) * ax[x];
      const double bot = row1[tx0[x]][v] + (row1[tx1[x]][v] - static_cast<double>(row1[tx0[x]][v])) * ax[x];
      out.at(x, y) = clamp_byte(top + (bot - top) * ay);
    }
  }
  return out;
}

// --- ROI --------------------------------------------------------------------

/// Removes a band of `px` pixels along the mask boundary (disk erosion).
inline BinaryMask erode_mask_border(const BinaryMask& mask, int px = 15) {
  if (px < 0) throw Error(ErrorCode::InvalidArgument, "border width must be >= 0");
  return morph::erode_disk(mask, px);
}

/// grayscale -> CLAHE -> crop to the eroded mask -> width normalisation -> zero outside the ROI.
inline FingerprintImage render_fingerprint(const FingerCrop& finger, const EnhancementConfig& cfg = {},
                                           int finger_id = 0) {
  const ChannelImage gray = to_grayscale(finger.image);
  const ChannelImage eq = apply_clahe(gray, cfg.clahe_clip, cfg.clahe_tiles_x, cfg.clahe_tiles_y);
  const BinaryMask roi = erode_mask_border(finger.mask, cfg.border_px);
  Rect box = bounding_box(roi);
  if (box.empty()) throw Error(ErrorCode::EmptyROI, "fingerprint region vanished after border removal");
  // The fingertip rule also bounds the ROI itself so that normalised samples
  // never exceed twice their width.
  box.height = std::min(box.height, 2 * box.width);

  // Background is zeroed only after resampling, so no dark halo bleeds into the ROI edge.
  ChannelImage cut(box.width, box.height);
  BinaryMask cut_roi(box.width, box.height);
  for (int y = 0; y < box.height; ++y) {
    for (int x = 0; x < box.width; ++x) {
      cut_roi.set(x, y, roi.get(box.x + x, box.y + y));
      cut.at(x, y) = eq.at(box.x + x, box.y + y);
    }
  }
  FingerprintImage fp;
  fp.gray = resize_to_width(cut, cfg.norm_width);
  fp.roi = resize_mask(cut_roi, fp.gray.width, fp.gray.height);
  for (std::size_t i = 0; i < fp.gray.values.size(); ++i)
    if (!fp.roi.bits[i]) fp.gray.values[i] = 0;
  fp.source_finger_id = finger_id;
  fp.roi_width = box.width;
  fp.roi_height = box.height;
  return fp;
}

}  // namespace touchprint
