#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "touchprint/config.hpp"
#include "touchprint/enhancement.hpp"
#include "touchprint/geometry.hpp"
#include "touchprint/quality.hpp"
#include "touchprint/segmentation.hpp"

namespace touchprint {

/// Located hand: plausibility verdict plus the mask reduced to its dominant components.
struct HandLocation {
  MaskVerdict verdict;
  BinaryMask mask;
  double fill = 0.0;  // dominant area / frame area
};

inline HandLocation locate_hand(const RasterImage& frame, const SegmentationConfig& cfg = {}) {
  const BinaryMask raw = segment_hand(frame, cfg);
  const ComponentSet cs = connected_components(raw);
  HandLocation loc;
  loc.verdict = check_mask_plausibility(cs, cfg);
  loc.mask = BinaryMask(frame.width, frame.height);
  const auto dom = dominant_components(cs, cfg.min_component_fraction);
  std::vector<char> keep(cs.components.size() + 1, 0);
  std::size_t area = 0;
  for (const auto* c : dom) {
    keep[c->id] = 1;
    area += c->area;
  }
  for (std::size_t i = 0; i < cs.labels.size(); ++i) loc.mask.bits[i] = keep[cs.labels[i]];
  loc.fill = static_cast<double>(area) / static_cast<double>(cs.frame_area());
  return loc;
}

/// Brings the hand upright (fingers up) and crops it to its mask.
inline MaskedImage upright_hand(const RasterImage& frame, const BinaryMask& hand_mask, const GeometryConfig& cfg = {}) {
  const int coarse = coarse_rotation_angle(hand_mask);
  // Crop first: quarter turns are exact permutations, so the order does not matter.
  MaskedImage m = crop_to_mask(MaskedImage{frame, hand_mask, Affine{}});
  if (coarse != 0) m = rotate_masked(m, coarse);
  const double tilt = edge_axis_correction(m.mask, cfg.min_axis_coherence);
  if (tilt != 0.0 && std::abs(tilt) <= cfg.max_tilt_angle) {
    m = rotate_masked(m, tilt);
    m = crop_to_mask(m);
  }
  return m;
}

/// Separated, upright fingertip crops, left to right.
inline std::vector<FingerCrop> fingertip_crops(const RasterImage& frame, const BinaryMask& hand_mask,
                                               const GeometryConfig& cfg = {}) {
  const MaskedImage hand = upright_hand(frame, hand_mask, cfg);
  auto crops = separate_fingers(hand.image, hand.mask, cfg.expected_fingers, cfg, hand.to_frame);
  for (auto& c : crops) c = crop_fingertip(upright_finger(c, cfg));
  return crops;
}

struct FingerSample {
  int finger_id = 0;
  FingerprintImage fingerprint;
  QualityReport quality;
  Affine to_frame;  // fingertip crop pixel -> camera frame pixel
};

inline std::vector<FingerSample> render_samples(const std::vector<FingerCrop>& crops, HandSide hand,
                                                const PipelineConfig& cfg = {}) {
  const auto ids = assign_finger_ids(crops, hand);
  std::vector<FingerSample> out;
  out.reserve(crops.size());
  for (std::size_t i = 0; i < crops.size(); ++i) {
    FingerSample s;
    s.finger_id = ids[i];
    s.fingerprint = render_fingerprint(crops[i], cfg.enhancement, ids[i]);
    s.quality = assess_quality(s.fingerprint, cfg.quality);
    s.to_frame = crops[i].to_frame;
    out.push_back(std::move(s));
  }
  return out;
}

/// Frame -> four fingerprint samples. Implausible masks raise DiscardFrame;
/// separation problems raise DiscardFrame or SeparationFailed.
inline std::vector<FingerSample> process_hand(const RasterImage& frame, HandSide hand, const PipelineConfig& cfg = {}) {
  const HandLocation loc = locate_hand(frame, cfg.segmentation);
  if (!loc.verdict.pass) {
    throw Error(ErrorCode::DiscardFrame, "implausible hand mask: " + std::string(to_string(loc.verdict.reason)));
  }
  const auto crops = fingertip_crops(frame, loc.mask, cfg.geometry);
  return render_samples(crops, hand, cfg);
}

}  // namespace touchprint
