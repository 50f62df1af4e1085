// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "support.hpp"
#include "touchprint/capture.hpp"
#include "touchprint/enhancement.hpp"
#include "touchprint/evaluation.hpp"
#include "touchprint/pipeline.hpp"
#include "touchprint/synthetic.hpp"

using namespace touchprint;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// --- 1 -----------------------------------------------------------------------

Histogram random_histogram(std::mt19937_64& rng) {
  Histogram h{};
  std::uniform_int_distribution<int> count(0, 1000), style(0, 2), bin(0, 255);
  switch (style(rng)) {
    case 0:
      for (auto& c : h) c = count(rng);
      break;
    case 1:
      for (int k = 0, n = 1 + style(rng) * 3; k < n; ++k) h[bin(rng)] += count(rng) + 1;
      break;
    default: {
      std::normal_distribution<double> a(bin(rng), 5 + style(rng) * 10), b(bin(rng), 8);
      for (int i = 0; i < 2000; ++i) {
        ++h[std::clamp(static_cast<int>(std::lround(a(rng))), 0, 255)];
        ++h[std::clamp(static_cast<int>(std::lround(b(rng))), 0, 255)];
      }
    }
  }
  if (std::all_of(h.begin(), h.end(), [](auto c) { return c == 0; })) h[bin(rng)] = 1;
  return h;
}

Outcome otsu_oracle() {
  std::mt19937_64 rng(1001);
  std::vector<Histogram> hs(1000);
  for (auto& h : hs) h = random_histogram(rng);
  std::vector<int> got(hs.size());
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < hs.size(); ++i) got[i] = otsu_threshold(hs[i]);
  const double t = seconds_since(t0);
  int mismatches = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) mismatches += got[i] != oracle::otsu(hs[i]);
  return {mismatches == 0 && t < 1.0, fmt("%d/1000 mismatches, %.3f s", mismatches, t)};
}

// --- 2 -----------------------------------------------------------------------

Outcome eer_oracle() {
  std::mt19937_64 rng(1002);
  std::vector<ScoreSet> sets(1000);
  for (std::size_t k = 0; k < sets.size(); ++k) {
    auto draw = [&](double mean) {
      std::normal_distribution<double> d(mean, 0.15);
      std::vector<double> v(2 + rng() % 499);
      for (auto& x : v) {
        x = std::clamp(d(rng), 0.0, 1.0);
        if (k % 3 == 0) x = std::round(x * 20) / 20;
      }
      return v;
    };
    sets[k] = {draw(0.65), draw(0.35)};
  }
  std::vector<double> got(sets.size());
  const auto t0 = Clock::now();
  for (std::size_t k = 0; k < sets.size(); ++k) got[k] = equal_error_rate(sets[k]);
  const double t = seconds_since(t0);
  double worst = 0;
  for (std::size_t k = 0; k < sets.size(); ++k)
    worst = std::max(worst, std::abs(got[k] - oracle::eer(sets[k].genuine, sets[k].impostor)));
  return {worst <= 1e-9 && t < 5.0, fmt("max |diff| %.3g, %.3f s", worst, t)};
}

// --- 3 -----------------------------------------------------------------------

Outcome minutiae_oracle() {
  std::mt19937_64 rng(1003);
  int equal = 0;
  std::size_t total = 0;
  for (int trial = 0; trial < 50; ++trial) {
    BinaryMask m(96, 96);
    if (trial % 2) {
      for (auto& b : m.bits) b = rng() % 100 < 45;
    } else {
      for (int k = 0; k < 14; ++k) {
        const int x0 = static_cast<int>(rng() % 96), y0 = static_cast<int>(rng() % 96);
        const int x1 = static_cast<int>(rng() % 96), y1 = static_cast<int>(rng() % 96);
        const int n = std::max({std::abs(x1 - x0), std::abs(y1 - y0), 1});
        for (int i = 0; i <= n; ++i)
          m.set(x0 + static_cast<int>(std::lround(double(x1 - x0) * i / n)),
                y0 + static_cast<int>(std::lround(double(y1 - y0) * i / n)), true);
      }
    }
    const auto skel = thin_zhang_suen(m);
    const auto ms = extract_minutiae(skel, orientation_field(testing_support::random_texture(rng, 96, 96)));
    std::set<std::pair<int, int>> got;
    for (const auto& mi : ms) got.insert({mi.x, mi.y});
    equal += got == oracle::cn_minutiae(skel) && got.size() == ms.size();
    total += ms.size();
  }
  return {equal == 50, fmt("%d/50 skeletons equal, %zu minutiae", equal, total)};
}

// --- 4 -----------------------------------------------------------------------

Outcome pipeline_geometry() {
  synth::Rng rng(1004);
  int ok = 0, wrong_output = 0, other_error = 0;
  std::map<std::string, int> explicit_failures;
  for (int i = 0; i < 200; ++i) {
    const HandSide hand = i % 2 ? HandSide::Left : HandSide::Right;
    const auto frame = synth::make_hand_frame(synth::random_hand_spec(rng, hand), rng);
    try {
      const auto samples = process_hand(frame.image, hand);
      bool good = samples.size() == 4;
      for (const auto& s : samples) {
        good = good && s.fingerprint.gray.width == 300 && s.fingerprint.gray.height <= 600;
        const auto [fx, fy] = s.to_frame.apply(s.fingerprint.roi_width / 2.0, 50.0);
        good = good && synth::nearest_finger_id(frame, fx, fy) == s.finger_id;
      }
      if (good) ++ok;
      else ++wrong_output;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DiscardFrame || e.code() == ErrorCode::SeparationFailed)
        ++explicit_failures[std::string(to_string(e.code()))];
      else
        ++other_error;
    }
  }
  std::string failures;
  for (const auto& [k, v] : explicit_failures) failures += " " + k + "=" + std::to_string(v);
  return {ok >= 190 && wrong_output == 0 && other_error == 0,
          fmt("%d/200 correct, %d wrong outputs, %d other errors;%s", ok, wrong_output, other_error,
              failures.empty() ? " no explicit failures" : failures.c_str())};
}

// --- 5 -----------------------------------------------------------------------

MinutiaTemplate random_template(std::mt19937_64& rng, int n) {
  MinutiaTemplate t{2, 300, 450, {}};
  std::uniform_real_distribution<double> ang(0.0, 2 * std::numbers::pi);
  while (static_cast<int>(t.minutiae.size()) < n) {
    const auto m = Minutia::make(20 + static_cast<int>(rng() % 260), 20 + static_cast<int>(rng() % 410), ang(rng));
    bool clash = false;
    for (const auto& o : t.minutiae) clash |= std::hypot(o.x - m.x, o.y - m.y) < 8;
    if (!clash) t.minutiae.push_back(m);
  }
  std::sort(t.minutiae.begin(), t.minutiae.end(), minutia_order);
  return t;
}

Outcome matcher_sanity() {
  std::mt19937_64 rng(1005);
  std::uniform_real_distribution<double> deg(-180.0, 180.0), shift(-40.0, 40.0);
  double min_self = 1.0, worst_drop = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = random_template(rng, 30);
    const double self = compare_templates(t, t).value;
    min_self = std::min(min_self, self);
    const double r = deg(rng) * std::numbers::pi / 180.0, tx = shift(rng), ty = shift(rng);
    MinutiaTemplate moved{t.finger_id, t.width, t.height, {}};
    for (const auto& m : t.minutiae) {
      const double x = m.x - 150.0, y = m.y - 225.0;
      moved.minutiae.push_back(Minutia::make(static_cast<int>(std::lround(150 + std::cos(r) * x - std::sin(r) * y + tx)),
                                             static_cast<int>(std::lround(225 + std::sin(r) * x + std::cos(r) * y + ty)),
                                             m.angle() + r));
    }
    std::sort(moved.minutiae.begin(), moved.minutiae.end(), minutia_order);
    worst_drop = std::max(worst_drop, self - compare_templates(t, moved).value);
  }
  std::vector<double> null;
  for (int trial = 0; trial < 100; ++trial)
    null.push_back(compare_templates(random_template(rng, 30), random_template(rng, 30)).value);
  std::sort(null.begin(), null.end());
  const double p95 = null[94];
  return {min_self == 1.0 && worst_drop <= 0.05 && p95 <= 0.3,
          fmt("self %.3f, worst rigid-motion drop %.3f, null p95 %.3f", min_self, worst_drop, p95)};
}

// --- 6 -----------------------------------------------------------------------

Outcome synthetic_recognition() {
  const auto t0 = Clock::now();
  synth::Rng rng(1006);
  const int ids[4] = {2, 3, 4, 5};
  std::vector<LabelledTemplate> ts;
  for (int s = 0; s < 20; ++s)
    for (int id : ids) {
      const auto finger = synth::make_corpus_finger(rng);
      for (int session = 1; session <= 2; ++session) {
        const auto fp = render_fingerprint(synth::render_corpus_session(finger, session, rng), {}, id);
        ts.push_back({"S" + std::to_string(s), id, std::to_string(session), extract_template(fp)});
      }
    }
  const auto records = cross_compare(ts);
  const double single = equal_error_rate(to_score_set(records));
  const double fused = equal_error_rate(to_score_set(fuse_records(records, 4, FusionRule::Mean)));
  const double t = seconds_since(t0);
  return {single <= 0.05 && fused <= single && t < 120.0,
          fmt("single-finger EER %.4f, fused EER %.4f, %.1f s", single, fused, t)};
}

// --- 7 -----------------------------------------------------------------------

RasterImage capture_frame(std::uint64_t seed, double blur) {
  synth::Rng rng(seed);
  auto spec = synth::capture_hand_spec(HandSide::Right);
  spec.blur_sigma = blur;
  return synth::make_hand_frame(spec, rng).image;
}

Outcome capture_session() {
  std::vector<RasterImage> good, blurred;
  for (int i = 0; i < 5; ++i) good.push_back(capture_frame(2000 + i, 0.0));
  for (int i = 0; i < 4; ++i) blurred.push_back(capture_frame(3000 + i, 4.0));

  auto done = start_session(HandSide::Right);
  for (const auto& f : good) advance_session(done, f);
  const bool done_ok = done.status == SessionStatus::Done && finalize_session(done).samples.size() == 4;

  auto failed = start_session(HandSide::Right);
  int fed = 0;
  while (failed.status != SessionStatus::Failed && failed.status != SessionStatus::Done && fed < 300)
    advance_session(failed, blurred[static_cast<std::size_t>(fed++) % blurred.size()]);
  const bool failed_ok = failed.status == SessionStatus::Failed && fed == 300;

  // Batch of short sessions: each gets one scripted frame sequence.
  PipelineConfig cfg;
  cfg.capture.samples_per_finger = 1;
  cfg.capture.max_frames = 2;
  synth::Rng rng(1007);
  const auto empty = synth::background_frame(1280, 720, rng);
  int observed_failures = 0, scripted_failures = 0;
  for (int s = 0; s < 50; ++s) {
    const int script = static_cast<int>(rng() % 4);
    std::vector<const RasterImage*> frames;
    switch (script) {
      case 0: frames = {&good[static_cast<std::size_t>(s) % good.size()]}; break;
      case 1: frames = {&empty, &good[static_cast<std::size_t>(s) % good.size()]}; break;
      case 2: frames = {&blurred[0], &blurred[1]}; break;
      default: frames = {&empty, &empty}; break;
    }
    scripted_failures += script >= 2;
    auto st = start_session(HandSide::Right, cfg);
    for (const auto* f : frames)
      if (st.status != SessionStatus::Done && st.status != SessionStatus::Failed) advance_session(st, *f);
    observed_failures += st.status == SessionStatus::Failed;
  }
  const double fta = fta_rate(50, observed_failures);
  const bool fta_ok = observed_failures == scripted_failures && fta == static_cast<double>(scripted_failures) / 50.0;
  return {done_ok && failed_ok && fta_ok,
          fmt("5 good frames -> %s; %d blurred frames -> %s; FTA %.2f (%d/50 failed, %d scripted)",
              std::string(to_string(done.status)).c_str(), fed, std::string(to_string(failed.status)).c_str(), fta,
              observed_failures, scripted_failures)};
}

// --- 8 -----------------------------------------------------------------------

Outcome format_fidelity() {
  std::mt19937_64 rng(1008);
  int round_trip = 0, length_ok = 0, truncations = 0, truncation_errors = 0;
  for (int i = 0; i < 1000; ++i) {
    MinutiaTemplate t{static_cast<int>(rng() % 256), static_cast<int>(rng() % 65536), static_cast<int>(rng() % 65536), {}};
    const int n = static_cast<int>(rng() % 300);
    for (int k = 0; k < n; ++k)
      t.minutiae.push_back({static_cast<int>(rng() % 65536), static_cast<int>(rng() % 65536),
                            static_cast<std::uint16_t>(rng())});
    std::sort(t.minutiae.begin(), t.minutiae.end(), minutia_order);
    const auto bytes = encode_template(t);
    round_trip += decode_template(bytes) == t;
    length_ok += bytes.size() == 12 + 6 * t.minutiae.size();
    // Every prefix for small templates, a random sample of prefixes otherwise.
    for (std::size_t cut = 0; cut < bytes.size(); cut += bytes.size() <= 64 ? 1 : 1 + rng() % 37) {
      ++truncations;
      try {
        decode_template(std::span<const std::uint8_t>(bytes.data(), cut));
      } catch (const Error& e) {
        truncation_errors += e.code() == ErrorCode::ParseError;
      }
    }
  }
  return {round_trip == 1000 && length_ok == 1000 && truncation_errors == truncations,
          fmt("round trip %d/1000, length %d/1000, truncations rejected %d/%d", round_trip, length_ok,
              truncation_errors, truncations)};
}

// --- 9 -----------------------------------------------------------------------

Outcome performance_budget() {
  synth::Rng rng(1009);
  const auto frame = synth::make_hand_frame(synth::capture_hand_spec(HandSide::Right, 1920, 1080), rng).image;
  process_hand(frame, HandSide::Right);
  std::vector<double> ms;
  for (int i = 0; i < 5; ++i) {
    const auto t0 = Clock::now();
    const auto samples = process_hand(frame, HandSide::Right);
    ms.push_back(seconds_since(t0) * 1000.0);
    if (samples.size() != 4) return {false, "frame did not yield 4 samples"};
  }
  std::sort(ms.begin(), ms.end());
  return {ms[2] <= 500.0, fmt("median %.0f ms per 1920x1080 frame (min %.0f, max %.0f)", ms[2], ms.front(), ms.back())};
}

// --- 10 ----------------------------------------------------------------------

Outcome clahe_invariants() {
  std::mt19937_64 rng(1010);
  int fixpoints = 0;
  for (int i = 0; i < 50; ++i) {
    const ChannelImage img(8 + static_cast<int>(rng() % 120), 8 + static_cast<int>(rng() % 120),
                           static_cast<std::uint8_t>(rng()));
    fixpoints += apply_clahe(img, 1.0 + static_cast<double>(rng() % 40) / 4.0, 1 + static_cast<int>(rng() % 8),
                             1 + static_cast<int>(rng() % 8)) == img;
  }
  int monotone = 0, entropy_ok = 0;
  double worst_entropy = 1e9;
  for (int i = 0; i < 100; ++i) {
    const auto img = testing_support::random_texture(rng, 128, 96);
    bool mono = true;
    for (const auto& lut : clahe_tiles(img, 2.0, 8, 8).luts)
      for (int v = 1; v < 256; ++v) mono = mono && lut[v - 1] <= lut[v];
    monotone += mono;
    const double gain = oracle::entropy(apply_clahe(img)) - oracle::entropy(img);
    worst_entropy = std::min(worst_entropy, gain);
    entropy_ok += gain >= -0.01;
  }
  return {fixpoints == 50 && monotone == 100 && entropy_ok == 100,
          fmt("fixpoint %d/50, monotone tiles %d/100, entropy non-decrease %d/100 (worst change %+.4f bits)", fixpoints,
              monotone, entropy_ok, worst_entropy)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Otsu oracle equivalence", otsu_oracle},
      {"EER oracle equivalence", eer_oracle},
      {"crossing-number oracle equivalence", minutiae_oracle},
      {"pipeline geometry on 200 hand frames", pipeline_geometry},
      {"matcher sanity", matcher_sanity},
      {"synthetic recognition", synthetic_recognition},
      {"capture session", capture_session},
      {"template format fidelity", format_fidelity},
      {"per-frame performance budget", performance_budget},
      {"CLAHE invariants", clahe_invariants},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2zu: %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
