#pragma once

#include <array>
#include <string_view>
#include <utility>
#include <vector>

#include "touchprint/config.hpp"
#include "touchprint/minutiae.hpp"
#include "touchprint/pipeline.hpp"
#include "touchprint/quality.hpp"

namespace touchprint {

enum class SessionStatus { WaitingForHand, Collecting, Done, Failed };
enum class Feedback { NoHand, Blurry, BadPose, Progress, Complete };

constexpr std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::WaitingForHand: return "WaitingForHand";
    case SessionStatus::Collecting: return "Collecting";
    case SessionStatus::Done: return "Done";
    case SessionStatus::Failed: return "Failed";
  }
  return "Unknown";
}

constexpr std::string_view to_string(Feedback f) {
  switch (f) {
    case Feedback::NoHand: return "NoHand";
    case Feedback::Blurry: return "Blurry";
    case Feedback::BadPose: return "BadPose";
    case Feedback::Progress: return "Progress";
    case Feedback::Complete: return "Complete";
  }
  return "Unknown";
}

/// One capture attempt. Buffers hold at most `samples_per_finger` candidates
/// and always have equal length: a frame contributes to all four or to none.
struct SessionState {
  HandSide hand = HandSide::Right;
  std::array<int, 4> finger_ids{};
  std::array<std::vector<FingerSample>, 4> buffers;
  std::array<int, 4> best{-1, -1, -1, -1};  // selected buffer index once Done
  SessionStatus status = SessionStatus::WaitingForHand;
  Feedback feedback = Feedback::NoHand;
  int frames_seen = 0;
  PipelineConfig config;

  std::size_t collected() const { return buffers[0].size(); }
};

inline SessionState start_session(HandSide hand, const PipelineConfig& cfg = {}) {
  SessionState st;
  st.hand = hand;
  st.finger_ids = finger_ids_for(hand);
  st.config = cfg;
  return st;
}

/// Advances the session in place by one frame and returns the feedback.
inline Feedback advance_session(SessionState& st, const RasterImage& frame) {
  if (st.status == SessionStatus::Done || st.status == SessionStatus::Failed) {
    throw Error(ErrorCode::SessionClosed, "session already " + std::string(to_string(st.status)));
  }
  const PipelineConfig& cfg = st.config;
  ++st.frames_seen;

  Feedback fb = Feedback::Progress;
  std::vector<FingerSample> samples;
  const HandLocation loc = locate_hand(frame, cfg.segmentation);
  if (!loc.verdict.pass) {
    fb = loc.verdict.reason == MaskReason::NoComponent ? Feedback::NoHand : Feedback::BadPose;
  } else {
    try {
      samples = render_samples(fingertip_crops(frame, loc.mask, cfg.geometry), st.hand, cfg);
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::DiscardFrame:
        case ErrorCode::SeparationFailed:
        case ErrorCode::WrongFingerCount:
        case ErrorCode::EmptyMask:
        case ErrorCode::EmptyROI:
          fb = Feedback::BadPose;
          break;
        default:
          throw;
      }
    }
    if (fb == Feedback::Progress) {
      for (const auto& s : samples)
        if (!s.quality.passed) fb = Feedback::Blurry;
    }
  }

  const auto cap = static_cast<std::size_t>(cfg.capture.samples_per_finger);
  if (fb == Feedback::Progress && st.collected() < cap) {
    for (std::size_t i = 0; i < 4; ++i) st.buffers[i].push_back(std::move(samples[i]));
    st.status = SessionStatus::Collecting;
  }
  if (st.collected() >= cap) {
    for (std::size_t i = 0; i < 4; ++i) {
      std::vector<QualityReport> reports;
      for (const auto& s : st.buffers[i]) reports.push_back(s.quality);
      st.best[i] = static_cast<int>(select_best(std::span<const QualityReport>(reports)));
    }
    st.status = SessionStatus::Done;
    fb = Feedback::Complete;
  } else if (st.frames_seen >= cfg.capture.max_frames) {
    st.status = SessionStatus::Failed;
  }
  st.feedback = fb;
  return fb;
}

/// Pure form: the successor state and the feedback for this frame.
inline std::pair<SessionState, Feedback> process_frame(const SessionState& st, const RasterImage& frame) {
  SessionState next = st;
  const Feedback fb = advance_session(next, frame);
  return {std::move(next), fb};
}

struct SessionResult {
  std::vector<FingerSample> samples;       // one per finger, in finger order
  std::vector<MinutiaTemplate> templates;  // aligned with samples
};

inline SessionResult finalize_session(const SessionState& st) {
  if (st.status != SessionStatus::Done) {
    throw Error(ErrorCode::NotDone, "session is " + std::string(to_string(st.status)) + ", not Done");
  }
  SessionResult r;
  for (std::size_t i = 0; i < 4; ++i) {
    const FingerSample& s = st.buffers[i][static_cast<std::size_t>(st.best[i])];
    r.samples.push_back(s);
    MinutiaTemplate t = extract_template(s.fingerprint, st.config.minutiae);
    t.finger_id = s.finger_id;
    r.templates.push_back(std::move(t));
  }
  return r;
}

}  // namespace touchprint
