#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <exception>
#include <map>
#include <mutex>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "touchprint/error.hpp"
#include "touchprint/matcher.hpp"
#include "touchprint/minutiae.hpp"

namespace touchprint {

struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;
};

struct RatePoint {
  double threshold = 0;
  double fmr = 0;
  double fnmr = 0;
};

inline void require_scores(const ScoreSet& s) {
  if (s.genuine.empty() || s.impostor.empty()) {
    throw Error(ErrorCode::EmptyScoreSet, "genuine and impostor scores are both required");
  }
  for (const auto* list : {&s.genuine, &s.impostor})
    for (double v : *list)
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "scores must be finite");
}

/// Error rates at every distinct score plus -inf and +inf; accept iff score >= t.
/// fmr is non-increasing and fnmr non-decreasing along the returned list.
inline std::vector<RatePoint> score_rates(const ScoreSet& s) {
  require_scores(s);
  std::vector<double> gen = s.genuine, imp = s.impostor;
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());
  std::vector<double> thresholds;
  thresholds.reserve(gen.size() + imp.size() + 2);
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  thresholds.insert(thresholds.end(), gen.begin(), gen.end());
  thresholds.insert(thresholds.end(), imp.begin(), imp.end());
  std::sort(thresholds.begin() + 1, thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  const double ng = static_cast<double>(gen.size()), ni = static_cast<double>(imp.size());
  std::vector<RatePoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto imp_below = std::lower_bound(imp.begin(), imp.end(), t) - imp.begin();
    const auto gen_below = std::lower_bound(gen.begin(), gen.end(), t) - gen.begin();
    out.push_back({t, (ni - static_cast<double>(imp_below)) / ni, static_cast<double>(gen_below) / ng});
  }
  return out;
}

/// Crossing of the fmr and fnmr curves, linearly interpolated between the two
/// threshold points that bracket it.
inline double equal_error_rate(const ScoreSet& s) {
  const auto pts = score_rates(s);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double dk = pts[k].fnmr - pts[k].fmr;
    if (dk < 0) continue;
    if (dk == 0 || k == 0) return pts[k].fmr;
    const double dp = pts[k - 1].fnmr - pts[k - 1].fmr;
    const double lambda = -dp / (dk - dp);
    return pts[k - 1].fmr + lambda * (pts[k].fmr - pts[k - 1].fmr);
  }
  return pts.back().fmr;  // unreachable: fnmr = 1 >= fmr = 0 at +inf
}

/// min over thresholds of max(fmr, fnmr).
inline double eer_discrete(const ScoreSet& s) {
  double best = 1.0;
  for (const auto& p : score_rates(s)) best = std::min(best, std::max(p.fmr, p.fnmr));
  return best;
}

inline double fta_rate(long long attempts, long long failures) {
  if (attempts <= 0) throw Error(ErrorCode::NoAttempts, "no capture attempts recorded");
  if (failures < 0 || failures > attempts) {
    throw Error(ErrorCode::InvalidArgument, "failures must lie in [0, attempts]");
  }
  return static_cast<double>(failures) / static_cast<double>(attempts);
}

// --- report -----------------------------------------------------------------

struct EvaluationReport {
  double eer = 0;
  double eer_discrete = 0;
  std::vector<std::pair<double, double>> det;  // (fmr, fnmr)
  double fta = 0;
  long long n_genuine = 0, n_impostor = 0, n_attempts = 0, n_failures = 0;
  nlohmann::json config = nlohmann::json::object();

  bool operator==(const EvaluationReport&) const = default;
};

inline EvaluationReport make_report(const ScoreSet& s, long long attempts = 0, long long failures = 0,
                                    nlohmann::json config = nlohmann::json::object()) {
  EvaluationReport r;
  r.eer = equal_error_rate(s);
  r.eer_discrete = eer_discrete(s);
  for (const auto& p : score_rates(s)) r.det.emplace_back(p.fmr, p.fnmr);
  r.n_genuine = static_cast<long long>(s.genuine.size());
  r.n_impostor = static_cast<long long>(s.impostor.size());
  r.n_attempts = attempts;
  r.n_failures = failures;
  r.fta = attempts > 0 ? fta_rate(attempts, failures) : 0.0;
  r.config = std::move(config);
  return r;
}

inline nlohmann::json report_to_json(const EvaluationReport& r) {
  nlohmann::json det = nlohmann::json::array();
  for (const auto& [fmr, fnmr] : r.det) det.push_back({{"fmr", fmr}, {"fnmr", fnmr}});
  return {{"eer", r.eer},
          {"eer_discrete", r.eer_discrete},
          {"det", det},
          {"fta", r.fta},
          {"counts",
           {{"genuine", r.n_genuine}, {"impostor", r.n_impostor}, {"attempts", r.n_attempts}, {"failures", r.n_failures}}},
          {"config", r.config}};
}

inline EvaluationReport report_from_json(const nlohmann::json& j) {
  try {
    EvaluationReport r;
    r.eer = j.at("eer").get<double>();
    r.eer_discrete = j.value("eer_discrete", r.eer);
    for (const auto& p : j.at("det")) r.det.emplace_back(p.at("fmr").get<double>(), p.at("fnmr").get<double>());
    r.fta = j.at("fta").get<double>();
    const auto& c = j.at("counts");
    r.n_genuine = c.at("genuine").get<long long>();
    r.n_impostor = c.at("impostor").get<long long>();
    r.n_attempts = c.at("attempts").get<long long>();
    r.n_failures = c.at("failures").get<long long>();
    r.config = j.value("config", nlohmann::json::object());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed report: ") + e.what());
  }
}

/// Path of the DET CSV written next to a report.
inline std::filesystem::path det_csv_path(const std::filesystem::path& report_path) {
  auto p = report_path;
  p.replace_filename(report_path.stem().string() + "_det.csv");
  return p;
}

inline void write_det_csv(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& det) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out.precision(17);
  out << "fmr,fnmr\n";
  for (const auto& [fmr, fnmr] : det) out << fmr << ',' << fnmr << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

/// Writes the JSON report and its DET CSV (`<stem>_det.csv`).
inline void write_report(const EvaluationReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << report_to_json(r).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
  write_det_csv(det_csv_path(path), r.det);
}

inline EvaluationReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  try {
    return report_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

// --- score files ------------------------------------------------------------

struct ScoreRecord {
  std::string probe_id;
  std::string reference_id;
  int finger_id = 0;
  bool genuine = false;
  double score = 0;

  bool operator==(const ScoreRecord&) const = default;
};

inline constexpr std::string_view kScoreHeader = "probe_id,reference_id,finger_id,label,score";

inline void write_scores(std::ostream& out, const std::vector<ScoreRecord>& records) {
  out << kScoreHeader << '\n';
  char buf[64];
  for (const auto& r : records) {
    const auto res = std::to_chars(buf, buf + sizeof buf, r.score);
    out << r.probe_id << ',' << r.reference_id << ',' << r.finger_id << ','
        << (r.genuine ? "genuine" : "impostor") << ',' << std::string_view(buf, res.ptr - buf) << '\n';
  }
}

inline void write_scores(const std::filesystem::path& path, const std::vector<ScoreRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  write_scores(out, records);
}

inline std::vector<ScoreRecord> read_scores(std::istream& in) {
  std::vector<ScoreRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineno == 1 && line.rfind("probe_id", 0) == 0)) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    auto bad = [&](const std::string& why) {
      return Error(ErrorCode::ParseError, "score file line " + std::to_string(lineno) + ": " + why);
    };
    if (f.size() != 5) throw bad("expected 5 fields");
    ScoreRecord r;
    r.probe_id = f[0];
    r.reference_id = f[1];
    auto [p1, e1] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), r.finger_id);
    if (e1 != std::errc{} || p1 != f[2].data() + f[2].size()) throw bad("bad finger_id");
    if (f[3] == "genuine") {
      r.genuine = true;
    } else if (f[3] != "impostor") {
      throw bad("label must be genuine or impostor");
    }
    auto [p2, e2] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), r.score);
    if (e2 != std::errc{} || p2 != f[4].data() + f[4].size() || !std::isfinite(r.score)) throw bad("bad score");
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<ScoreRecord> read_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return read_scores(in);
}

inline ScoreSet to_score_set(const std::vector<ScoreRecord>& records) {
  ScoreSet s;
  for (const auto& r : records) (r.genuine ? s.genuine : s.impostor).push_back(r.score);
  return s;
}

// --- cross comparison ---------------------------------------------------------

/// Runs `fn(i)` for i in [0, n) on `jobs` threads; results land by index, so the
/// output never depends on scheduling.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, int jobs, Fn fn) {
  std::vector<T> out(n);
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          out[i] = fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// A template with the identity parsed from `<subject>_<finger>_<session>`.
struct LabelledTemplate {
  std::string subject;
  int finger_id = 0;
  std::string session;
  MinutiaTemplate tmpl;

  std::string id() const { return subject + "_" + std::to_string(finger_id) + "_" + session; }
};

inline bool parse_template_name(const std::string& stem, std::string& subject, int& finger, std::string& session) {
  static const std::regex re(R"(^(.+)_(\d{1,2})_([^_]+)$)");
  std::smatch m;
  if (!std::regex_match(stem, m, re)) return false;
  subject = m[1];
  finger = std::stoi(m[2]);
  session = m[3];
  return true;
}

inline std::vector<LabelledTemplate> load_template_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::IoError, "'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".mtft") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<LabelledTemplate> out;
  for (const auto& f : files) {
    LabelledTemplate t;
    if (!parse_template_name(f.stem().string(), t.subject, t.finger_id, t.session)) {
      throw Error(ErrorCode::ParseError, "template name '" + f.filename().string() +
                                             "' does not follow <subject>_<finger>_<session>.mtft");
    }
    t.tmpl = load_template(f);
    out.push_back(std::move(t));
  }
  return out;
}

/// All same-finger comparisons: genuine across sessions of one subject,
/// impostor across subjects. Each unordered pair is scored once; empty
/// templates score 0.
inline std::vector<ScoreRecord> cross_compare(const std::vector<LabelledTemplate>& ts, const MatcherConfig& cfg = {},
                                              int jobs = 1) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = i + 1; j < ts.size(); ++j) {
      if (ts[i].finger_id != ts[j].finger_id) continue;
      if (ts[i].subject == ts[j].subject && ts[i].session == ts[j].session) continue;
      pairs.emplace_back(i, j);
    }
  return parallel_map<ScoreRecord>(pairs.size(), jobs, [&](std::size_t k) {
    const auto& a = ts[pairs[k].first];
    const auto& b = ts[pairs[k].second];
    ScoreRecord r;
    r.probe_id = a.id();
    r.reference_id = b.id();
    r.finger_id = a.finger_id;
    r.genuine = a.subject == b.subject;
    r.score = a.tmpl.minutiae.empty() || b.tmpl.minutiae.empty() ? 0.0 : compare_templates(a.tmpl, b.tmpl, cfg).value;
    return r;
  });
}

/// Fuses per-finger records into one record per comparison of hands (`fingers`
/// = 4) or of both hands (`fingers` = 8). Groups with missing fingers are dropped.
inline std::vector<ScoreRecord> fuse_records(const std::vector<ScoreRecord>& records, int fingers,
                                             FusionRule rule = FusionRule::Mean) {
  if (fingers != 4 && fingers != 8) throw Error(ErrorCode::InvalidArgument, "fusion covers 4 or 8 fingers");
  auto split = [](const std::string& id, std::string& subject, std::string& session) {
    int finger = 0;
    if (!parse_template_name(id, subject, finger, session)) {
      throw Error(ErrorCode::ParseError, "cannot fuse record with id '" + id + "'");
    }
  };
  struct Group {
    std::string a, b;
    bool genuine;
    std::vector<double> scores;
  };
  std::map<std::string, Group> groups;
  for (const auto& r : records) {
    std::string sa, ea, sb, eb;
    split(r.probe_id, sa, ea);
    split(r.reference_id, sb, eb);
    std::string a = sa + "_" + ea, b = sb + "_" + eb;
    if (b < a) std::swap(a, b);
    const std::string hand = fingers == 8 ? "both" : (r.finger_id <= 5 ? "right" : "left");
    const std::string key = a + "|" + b + "|" + hand;
    auto& g = groups[key];
    g.a = a + (fingers == 8 ? "" : "_" + hand);
    g.b = b + (fingers == 8 ? "" : "_" + hand);
    g.genuine = r.genuine;
    g.scores.push_back(r.score);
  }
  std::vector<ScoreRecord> out;
  for (const auto& [key, g] : groups) {
    if (static_cast<int>(g.scores.size()) != fingers) continue;
    out.push_back({g.a, g.b, 0, g.genuine, fuse_scores(g.scores, rule)});
  }
  return out;
}

}  // namespace touchprint
