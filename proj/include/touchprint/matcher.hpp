#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>
#include <tuple>
#include <vector>

#include "touchprint/error.hpp"
#include "touchprint/minutiae.hpp"

namespace touchprint {

struct MatcherConfig {
  int root_limit = 64;
  double dist_tol = 15.0;                       // pixels
  double angle_tol = std::numbers::pi / 8.0;    // radians
  int neighbours = 3;                           // descriptor size
  double descriptor_angle_weight = 10.0;        // pixels per radian in the descriptor distance
};

struct MatchScore {
  double value = 0.0;  // [0, 1]
  int mated_count = 0;
};

enum class FusionRule { Mean, Max, SumNormalized };

constexpr std::string_view to_string(FusionRule r) {
  switch (r) {
    case FusionRule::Mean: return "mean";
    case FusionRule::Max: return "max";
    case FusionRule::SumNormalized: return "sum-normalized";
  }
  return "mean";
}

inline FusionRule parse_fusion_rule(std::string_view s) {
  if (s == "mean") return FusionRule::Mean;
  if (s == "max") return FusionRule::Max;
  if (s == "sum-normalized") return FusionRule::SumNormalized;
  throw Error(ErrorCode::ConfigError, "unknown fusion rule '" + std::string(s) + "'");
}

namespace detail {

inline constexpr int kAngleUnits = 65536;

/// Unsigned circular difference of two angle codes, in codes.
inline int code_diff(int a, int b) {
  const int d = ((a - b) % kAngleUnits + kAngleUnits) % kAngleUnits;
  return std::min(d, kAngleUnits - d);
}

inline int code_of_direction(double dx, double dy) { return Minutia::encode_angle(std::atan2(dy, dx)); }

struct NeighbourEntry {
  double dist;
  int direction;    // direction to the neighbour relative to the minutia angle, code
  int orientation;  // neighbour angle relative to the minutia angle, code
};

using Descriptor = std::vector<NeighbourEntry>;

inline std::vector<Descriptor> describe(const std::vector<Minutia>& ms, int k) {
  std::vector<Descriptor> out(ms.size());
  std::vector<std::pair<long long, std::size_t>> cand;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    cand.clear();
    for (std::size_t j = 0; j < ms.size(); ++j) {
      if (j == i) continue;
      const long long dx = ms[j].x - ms[i].x, dy = ms[j].y - ms[i].y;
      cand.emplace_back(dx * dx + dy * dy, j);
    }
    // Neighbours ordered by distance, then by their own (y, x, angle).
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(k), cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(n), cand.end(),
                      [&](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first < b.first;
                        return minutia_order(ms[a.second], ms[b.second]);
                      });
    for (std::size_t t = 0; t < n; ++t) {
      const Minutia& nb = ms[cand[t].second];
      const int dir = code_of_direction(nb.x - ms[i].x, nb.y - ms[i].y);
      out[i].push_back({std::sqrt(static_cast<double>(cand[t].first)),
                        (dir - ms[i].angle_code + kAngleUnits) % kAngleUnits,
                        (nb.angle_code - ms[i].angle_code + kAngleUnits) % kAngleUnits});
    }
  }
  return out;
}

inline double descriptor_distance(const Descriptor& a, const Descriptor& b, double angle_weight) {
  const std::size_t n = std::min(a.size(), b.size());
  const double per_code = angle_weight * 2.0 * std::numbers::pi / kAngleUnits;
  double d = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d += std::abs(a[i].dist - b[i].dist);
    d += per_code * (code_diff(a[i].direction, b[i].direction) + code_diff(a[i].orientation, b[i].orientation));
  }
  // Missing entries count as a maximal mismatch.
  const std::size_t missing = std::max(a.size(), b.size()) - n;
  return d + static_cast<double>(missing) * 1e6;
}

using Key = std::tuple<int, int, int>;
inline Key key_of(const Minutia& m) { return {m.y, m.x, m.angle_code}; }

/// Order-independent identity of a pair (a from one template, b from the other).
inline std::pair<Key, Key> pair_key(const Minutia& a, const Minutia& b) {
  const Key ka = key_of(a), kb = key_of(b);
  return ka < kb ? std::pair{ka, kb} : std::pair{kb, ka};
}

struct Local {
  double x, y;
  int angle;
};

/// Coordinates relative to the root minutia, rotated so the root points along +x.
inline std::vector<Local> localise(const std::vector<Minutia>& ms, const Minutia& root) {
  const double a = root.angle();
  const double c = std::cos(a), s = std::sin(a);
  std::vector<Local> out;
  out.reserve(ms.size());
  for (const auto& m : ms) {
    const double dx = m.x - root.x, dy = m.y - root.y;
    out.push_back({c * dx + s * dy, -s * dx + c * dy, (m.angle_code - root.angle_code + kAngleUnits) % kAngleUnits});
  }
  return out;
}

}  // namespace detail

/// Number of one-to-one mates between two templates once both are expressed
/// relative to the root pair (ra, rb).
inline int mate_under_root(const MinutiaTemplate& a, const MinutiaTemplate& b, std::size_t ra, std::size_t rb,
                           const MatcherConfig& cfg = {}) {
  const auto la = detail::localise(a.minutiae, a.minutiae[ra]);
  const auto lb = detail::localise(b.minutiae, b.minutiae[rb]);
  const double tol2 = cfg.dist_tol * cfg.dist_tol;
  const int angle_tol = static_cast<int>(std::floor(cfg.angle_tol * detail::kAngleUnits / (2 * std::numbers::pi)));
  struct Cand {
    double d2;
    int dangle;
    std::pair<detail::Key, detail::Key> key;
    std::size_t i, j;
  };
  std::vector<Cand> cands;
  for (std::size_t i = 0; i < la.size(); ++i) {
    for (std::size_t j = 0; j < lb.size(); ++j) {
      const double dx = la[i].x - lb[j].x, dy = la[i].y - lb[j].y;
      const double d2 = dx * dx + dy * dy;
      if (d2 > tol2) continue;
      const int da = detail::code_diff(la[i].angle, lb[j].angle);
      if (da > angle_tol) continue;
      cands.push_back({d2, da, detail::pair_key(a.minutiae[i], b.minutiae[j]), i, j});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    return std::tie(x.d2, x.dangle, x.key) < std::tie(y.d2, y.dangle, y.key);
  });
  std::vector<bool> used_a(la.size(), false), used_b(lb.size(), false);
  int mated = 0;
  for (const auto& c : cands) {
    if (used_a[c.i] || used_b[c.j]) continue;
    used_a[c.i] = used_b[c.j] = true;
    ++mated;
  }
  return mated;
}

/// Pairing score: 2m / (|A| + |B|), maximised over the most similar root pairs.
inline MatchScore compare_templates(const MinutiaTemplate& a, const MinutiaTemplate& b, const MatcherConfig& cfg = {}) {
  if (a.minutiae.empty() || b.minutiae.empty()) throw Error(ErrorCode::EmptyTemplate, "cannot compare an empty template");
  const auto da = detail::describe(a.minutiae, cfg.neighbours);
  const auto db = detail::describe(b.minutiae, cfg.neighbours);

  struct Root {
    double dist;
    std::pair<detail::Key, detail::Key> key;
    std::size_t i, j;
  };
  std::vector<Root> roots;
  roots.reserve(a.minutiae.size() * b.minutiae.size());
  for (std::size_t i = 0; i < a.minutiae.size(); ++i)
    for (std::size_t j = 0; j < b.minutiae.size(); ++j)
      roots.push_back({detail::descriptor_distance(da[i], db[j], cfg.descriptor_angle_weight),
                       detail::pair_key(a.minutiae[i], b.minutiae[j]), i, j});
  const auto limit = std::min(roots.size(), static_cast<std::size_t>(std::max(cfg.root_limit, 1)));
  auto root_less = [](const Root& x, const Root& y) { return std::tie(x.dist, x.key) < std::tie(y.dist, y.key); };
  std::partial_sort(roots.begin(), roots.begin() + static_cast<std::ptrdiff_t>(limit), roots.end(), root_less);

  const std::size_t total = a.minutiae.size() + b.minutiae.size();
  MatchScore best;
  for (std::size_t r = 0; r < limit; ++r) {
    const int m = mate_under_root(a, b, roots[r].i, roots[r].j, cfg);
    if (m > best.mated_count) {
      best.mated_count = m;
      best.value = 2.0 * m / static_cast<double>(total);
    }
  }
  return best;
}

/// Combines per-finger comparison scores; the result stays in [0, 1].
inline double fuse_scores(std::span<const double> scores, FusionRule rule = FusionRule::Mean) {
  if (scores.empty()) throw Error(ErrorCode::EmptyScores, "nothing to fuse");
  if (rule == FusionRule::Max) return *std::max_element(scores.begin(), scores.end());
  double sum = 0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

}  // namespace touchprint
