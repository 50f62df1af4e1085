// touchprint: command-line front end for the contactless fingerprint toolkit.
//
// Exit codes: 0 success, 1 domain failure (discarded frame, failed capture,
// unusable sample), 2 usage, configuration or I/O problem. Failures print a
// one-line JSON object on standard error.

#include <glob.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "touchprint/capture.hpp"
#include "touchprint/config.hpp"
#include "touchprint/evaluation.hpp"
#include "touchprint/image_io.hpp"
#include "touchprint/pipeline.hpp"
#include "touchprint/synthetic.hpp"

namespace fs = std::filesystem;
using namespace touchprint;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::optional<std::string> config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
};

PipelineConfig effective_config(const GlobalOptions& g) {
  std::optional<fs::path> path;
  if (g.config_path) path = *g.config_path;
  PipelineConfig cfg = resolve_config(path);
  for (const auto& o : g.overrides) cfg = apply_override(cfg, o);
  return cfg;
}

HandSide parse_hand(const std::string& s) {
  if (s == "right") return HandSide::Right;
  if (s == "left") return HandSide::Left;
  throw Error(ErrorCode::InvalidArgument, "hand must be 'left' or 'right', got '" + s + "'");
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
    case ErrorCode::InvalidArgument:
      return 2;
    default:
      return 1;
  }
}

void report_error(std::string_view code, std::string_view message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << '\n';
}

ChannelImage read_gray(const fs::path& p) {
  const RasterImage img = io::read_image(p);
  return img.channels == 1 ? as_channel(img) : to_grayscale(img);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

/// Frames named by a directory (sorted) or a shell glob (sorted by glob(3)).
std::vector<fs::path> list_frames(const std::string& spec) {
  std::vector<fs::path> out;
  if (fs::is_directory(spec)) {
    for (const auto& e : fs::directory_iterator(spec)) {
      const auto ext = e.path().extension().string();
      if (e.is_regular_file() && (ext == ".png" || ext == ".ppm" || ext == ".pgm")) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
  } else {
    glob_t g{};
    if (::glob(spec.c_str(), 0, nullptr, &g) == 0)
      for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    ::globfree(&g);
  }
  if (out.empty()) throw Error(ErrorCode::IoError, "no frames match '" + spec + "'");
  return out;
}

std::string sample_name(const std::string& subject, int finger_id, const std::string& session) {
  return subject + "_" + std::to_string(finger_id) + "_" + session;
}

json quality_json(const QualityReport& q) {
  return {{"composite", q.composite}, {"sharpness", q.sharpness}, {"size_ok", q.size_ok}, {"passed", q.passed}};
}

// --- subcommands ------------------------------------------------------------

int run_segment(const PipelineConfig& cfg, const std::string& input, const std::string& out) {
  const auto loc = locate_hand(io::read_image(input), cfg.segmentation);
  io::write_mask(out, loc.mask);
  std::cout << json{{"mask", out}, {"fill", loc.fill}, {"plausible", loc.verdict.pass},
                    {"reason", to_string(loc.verdict.reason)}}.dump()
            << '\n';
  return 0;
}

int run_process(const PipelineConfig& cfg, const std::string& input, HandSide hand, const std::string& out_dir,
                const std::string& subject, const std::string& session) {
  const auto samples = process_hand(io::read_image(input), hand, cfg);
  fs::create_directories(out_dir);
  json files = json::array();
  for (const auto& s : samples) {
    const auto path = fs::path(out_dir) / (sample_name(subject, s.finger_id, session) + ".png");
    io::write_image(path, s.fingerprint.gray);
    files.push_back({{"file", path.string()}, {"finger_id", s.finger_id}, {"quality", quality_json(s.quality)}});
  }
  std::cout << json{{"samples", files}}.dump() << '\n';
  return 0;
}

int run_extract(const PipelineConfig& cfg, const std::string& input, const std::string& out, std::optional<int> finger) {
  FingerprintImage fp;
  fp.gray = read_gray(input);
  fp.roi = derive_roi(fp.gray);
  std::string subject, session;
  int parsed = 0;
  if (finger) fp.source_finger_id = *finger;
  else if (parse_template_name(fs::path(input).stem().string(), subject, parsed, session)) fp.source_finger_id = parsed;
  const auto t = extract_template(fp, cfg.minutiae);
  const fs::path target = out.empty() ? fs::path(input).replace_extension(".mtft") : fs::path(out);
  save_template(target, t);
  std::cout << json{{"template", target.string()}, {"minutiae", t.minutiae.size()}}.dump() << '\n';
  return 0;
}

int run_match(const PipelineConfig& cfg, const std::string& a, const std::string& b) {
  const auto s = compare_templates(load_template(a), load_template(b), cfg.matcher);
  std::printf("%.6f\n", s.value);
  return 0;
}

int run_capture(const PipelineConfig& cfg, const std::string& frames, HandSide hand, const std::string& out_dir,
                const std::string& subject, const std::string& session) {
  const auto paths = list_frames(frames);
  fs::create_directories(out_dir);
  SessionState st = start_session(hand, cfg);
  json log_frames = json::array();
  for (const auto& p : paths) {
    if (st.status == SessionStatus::Done || st.status == SessionStatus::Failed) break;
    const Feedback fb = advance_session(st, io::read_image(p));
    log_frames.push_back({{"frame", p.filename().string()}, {"feedback", to_string(fb)}});
    std::cerr << "[" << st.frames_seen << "] " << to_string(fb) << " (" << st.collected() << "/"
              << cfg.capture.samples_per_finger << ")\n";
  }
  json log{{"status", to_string(st.status)}, {"frames_seen", st.frames_seen}, {"hand", hand == HandSide::Right ? "right" : "left"},
           {"frames", log_frames}};
  if (st.status == SessionStatus::Done) {
    const auto result = finalize_session(st);
    json fingers = json::array();
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& s = result.samples[i];
      const auto stem = sample_name(subject, s.finger_id, session);
      io::write_image(fs::path(out_dir) / (stem + ".png"), s.fingerprint.gray);
      save_template(fs::path(out_dir) / (stem + ".mtft"), result.templates[i]);
      json candidates = json::array();
      for (const auto& c : st.buffers[i]) candidates.push_back(c.quality.composite);
      fingers.push_back({{"finger_id", s.finger_id},
                         {"selected", st.best[i]},
                         {"quality", quality_json(s.quality)},
                         {"candidate_quality", candidates},
                         {"minutiae", result.templates[i].minutiae.size()}});
    }
    log["fingers"] = fingers;
  }
  write_json(fs::path(out_dir) / "session.json", log);
  if (st.status != SessionStatus::Done) {
    report_error("FailureToAcquire", "session ended " + std::string(to_string(st.status)) + " after " +
                                         std::to_string(st.frames_seen) + " frames");
    return 1;
  }
  return 0;
}

struct EvaluateOptions {
  std::string scores;
  std::vector<std::string> template_dirs;
  std::string out;
  std::string scores_out;
  int fuse = 0;
  int jobs = 1;
  long long attempts = 0, failures = 0;
};

int run_evaluate(const PipelineConfig& cfg, const EvaluateOptions& o) {
  if (o.scores.empty() == o.template_dirs.empty()) {
    throw Error(ErrorCode::InvalidArgument, "give exactly one of --scores or --templates");
  }
  std::vector<ScoreRecord> records;
  if (!o.scores.empty()) {
    records = read_scores(fs::path(o.scores));
  } else {
    std::vector<LabelledTemplate> all;
    for (const auto& d : o.template_dirs) {
      auto ts = load_template_dir(d);
      all.insert(all.end(), std::make_move_iterator(ts.begin()), std::make_move_iterator(ts.end()));
    }
    records = cross_compare(all, cfg.matcher, o.jobs);
  }
  if (o.fuse != 0) records = fuse_records(records, o.fuse, cfg.fusion.rule);
  if (!o.scores_out.empty()) write_scores(fs::path(o.scores_out), records);
  json run_cfg = to_json(cfg);
  run_cfg["evaluate"] = {{"fuse", o.fuse}, {"source", o.scores.empty() ? "templates" : "scores"}};
  const auto report = make_report(to_score_set(records), o.attempts, o.failures, run_cfg);
  if (!o.out.empty()) write_report(report, o.out);
  std::cout << json{{"eer", report.eer},
                    {"eer_discrete", report.eer_discrete},
                    {"fta", report.fta},
                    {"genuine", report.n_genuine},
                    {"impostor", report.n_impostor}}
                   .dump()
            << '\n';
  return 0;
}

int run_synth_frames(std::uint64_t seed, const std::string& out_dir, int count, HandSide hand, double blur,
                     bool random_pose) {
  fs::create_directories(out_dir);
  synth::Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    auto spec = random_pose ? synth::random_hand_spec(rng, hand) : synth::capture_hand_spec(hand);
    spec.blur_sigma = blur;
    const auto frame = synth::make_hand_frame(spec, rng);
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04d.png", i);
    io::write_image(fs::path(out_dir) / name, frame.image);
  }
  std::cout << json{{"frames", count}, {"dir", out_dir}}.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contactless fingerprint toolkit: segmentation, enhancement, minutiae, matching, evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON config file (default: $TOUCHPRINT_CONFIG, then built-ins)");
  app.add_option("--set", g.overrides, "Override one config value, section.key=value (repeatable)");
  app.add_option("--seed", g.seed, "Seed for synthetic-data helpers");

  std::string input, output, hand = "right", subject = "subject", session = "1";
  auto add_sample_naming = [&](CLI::App* sub) {
    sub->add_option("--subject", subject, "Subject identifier used in output names");
    sub->add_option("--session", session, "Session identifier used in output names");
  };

  auto* segment = app.add_subcommand("segment", "Hand mask of a frame, written as a 1-bit PNG");
  segment->add_option("image", input, "Input frame")->required();
  segment->add_option("-o,--out", output, "Output mask PNG")->required();

  auto* process = app.add_subcommand("process", "Frame to four fingerprint images");
  process->add_option("image", input, "Input frame")->required();
  process->add_option("--hand", hand, "left or right")->check(CLI::IsMember({"left", "right"}));
  process->add_option("-o,--out", output, "Output directory")->required();
  add_sample_naming(process);

  std::optional<int> finger;
  auto* extract = app.add_subcommand("extract", "Fingerprint image to .mtft template");
  extract->add_option("image", input, "Fingerprint PNG")->required();
  extract->add_option("-o,--out", output, "Output template (default: input with .mtft)");
  extract->add_option("--finger-id", finger, "Finger position code (default: parsed from the file name)");

  std::string tmpl_a, tmpl_b;
  auto* match = app.add_subcommand("match", "Compare two templates; prints the score");
  match->add_option("a", tmpl_a, "First template")->required();
  match->add_option("b", tmpl_b, "Second template")->required();

  std::string frames;
  auto* capture = app.add_subcommand("capture-sim", "Run a capture session over recorded frames");
  capture->add_option("--frames", frames, "Frame directory or glob")->required();
  capture->add_option("--hand", hand, "left or right")->check(CLI::IsMember({"left", "right"}));
  capture->add_option("-o,--out", output, "Output directory")->required();
  add_sample_naming(capture);

  EvaluateOptions eval;
  auto* evaluate = app.add_subcommand("evaluate", "EER, DET and FTA report from scores or template directories");
  evaluate->add_option("--scores", eval.scores, "Score CSV");
  evaluate->add_option("--templates", eval.template_dirs, "Directory of <subject>_<finger>_<session>.mtft (repeatable)");
  evaluate->add_option("-o,--out", eval.out, "Report JSON path; the DET CSV is written beside it");
  evaluate->add_option("--scores-out", eval.scores_out, "Write the (fused) comparison scores as CSV");
  evaluate->add_option("--fuse", eval.fuse, "Fuse 4 or 8 finger scores per comparison")->check(CLI::IsMember({4, 8}));
  evaluate->add_option("--jobs", eval.jobs, "Comparison threads")->check(CLI::PositiveNumber);
  evaluate->add_option("--attempts", eval.attempts, "Capture attempts for the FTA rate");
  evaluate->add_option("--failures", eval.failures, "Failed capture attempts for the FTA rate");

  auto* config = app.add_subcommand("config", "Print the effective configuration");

  int count = 5;
  double blur = 0.0;
  bool random_pose = false;
  auto* synth_frames = app.add_subcommand("synth-frames", "Generate synthetic hand frames");
  synth_frames->add_option("-o,--out", output, "Output directory")->required();
  synth_frames->add_option("--count", count, "Number of frames")->check(CLI::PositiveNumber);
  synth_frames->add_option("--hand", hand, "left or right")->check(CLI::IsMember({"left", "right"}));
  synth_frames->add_option("--blur", blur, "Gaussian blur sigma")->check(CLI::NonNegativeNumber);
  synth_frames->add_flag("--random-pose", random_pose, "Random rotation, size and spacing instead of capture pose");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("UsageError", e.what());
    return 2;
  }

  try {
    const PipelineConfig cfg = effective_config(g);
    if (*segment) return run_segment(cfg, input, output);
    if (*process) return run_process(cfg, input, parse_hand(hand), output, subject, session);
    if (*extract) return run_extract(cfg, input, output, finger);
    if (*match) return run_match(cfg, tmpl_a, tmpl_b);
    if (*capture) return run_capture(cfg, frames, parse_hand(hand), output, subject, session);
    if (*evaluate) return run_evaluate(cfg, eval);
    if (*config) {
      std::cout << to_json(cfg).dump(2) << '\n';
      return 0;
    }
    if (*synth_frames) return run_synth_frames(g.seed, output, count, parse_hand(hand), blur, random_pose);
  } catch (const Error& e) {
    report_error(to_string(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    report_error("IoError", e.what());
    return 2;
  }
  return 2;
}
