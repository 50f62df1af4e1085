#pragma once

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>

#include <json.hpp>

#include "touchprint/enhancement.hpp"
#include "touchprint/error.hpp"
#include "touchprint/geometry.hpp"
#include "touchprint/matcher.hpp"
#include "touchprint/minutiae.hpp"
#include "touchprint/quality.hpp"
#include "touchprint/segmentation.hpp"

namespace touchprint {

struct CaptureConfig {
  int max_frames = 300;  // frame budget before the session counts as a failure to acquire
  int samples_per_finger = 5;
};

struct FusionConfig {
  FusionRule rule = FusionRule::Mean;
};

/// Every tunable of the toolkit, grouped by stage.
struct PipelineConfig {
  SegmentationConfig segmentation;
  GeometryConfig geometry;
  EnhancementConfig enhancement;
  QualityConfig quality;
  MinutiaeConfig minutiae;
  MatcherConfig matcher;
  FusionConfig fusion;
  CaptureConfig capture;
};

inline constexpr const char* kConfigEnvVar = "TOUCHPRINT_CONFIG";

/// Calls `v(section, key, field, lo, hi)` for every configurable field.
template <typename Cfg, typename V>
void visit_fields(Cfg& c, V&& v) {
  constexpr double kPi = std::numbers::pi;
  auto& s = c.segmentation;
  v("segmentation", "min_component_fraction", s.min_component_fraction, 0.0, 1.0);
  v("segmentation", "max_components", s.max_components, 1, 64);
  v("segmentation", "min_fill", s.min_fill, 0.0, 1.0);
  v("segmentation", "max_fill", s.max_fill, 0.0, 1.0);
  v("segmentation", "min_aspect", s.min_aspect, 0.0, 100.0);
  v("segmentation", "max_aspect", s.max_aspect, 0.0, 100.0);
  v("segmentation", "min_fill_ratio", s.min_fill_ratio, 0.0, 1.0);
  v("segmentation", "cr_floor", s.cr_floor, 0, 255);
  v("segmentation", "hue_tolerance", s.hue_tolerance, 0, 128);
  v("segmentation", "hue_shift", s.hue_shift, 0, 255);
  auto& g = c.geometry;
  v("geometry", "trim_step", g.trim_step, 0.001, 1.0);
  v("geometry", "max_trim", g.max_trim, 0.0, 1.0);
  v("geometry", "finger_min_fraction", g.finger_min_fraction, 0.0, 1.0);
  v("geometry", "max_fine_angle", g.max_fine_angle, 0.0, 90.0);
  v("geometry", "max_tilt_angle", g.max_tilt_angle, 0.0, 90.0);
  v("geometry", "min_axis_coherence", g.min_axis_coherence, 0.0, 1.0);
  auto& e = c.enhancement;
  v("enhancement", "clahe_clip", e.clahe_clip, 1.0, 256.0);
  v("enhancement", "clahe_tiles_x", e.clahe_tiles_x, 1, 64);
  v("enhancement", "clahe_tiles_y", e.clahe_tiles_y, 1, 64);
  v("enhancement", "border_px", e.border_px, 0, 200);
  v("enhancement", "norm_width", e.norm_width, 32, 4096);
  auto& q = c.quality;
  v("quality", "grad_min", q.grad_min, 0.0, 255.0);
  v("quality", "sharp_min", q.sharp_min, 0.0, 1.0);
  v("quality", "window", q.window, 3, 1024);
  v("quality", "min_roi_height", q.min_roi_height, 0, 100000);
  v("quality", "min_roi_area", q.min_roi_area, 0, 1000000000);
  v("quality", "external_cmd", q.external_cmd, 0, 0);
  auto& m = c.minutiae;
  v("minutiae", "block_size", m.block_size, 4, 128);
  v("minutiae", "smooth_length", m.smooth_length, 1, 63);
  v("minutiae", "threshold_block", m.threshold_block, 2, 256);
  v("minutiae", "border_px", m.border_px, 0, 200);
  v("minutiae", "merge_px", m.merge_px, 0.0, 200.0);
  v("minutiae", "max_minutiae", m.max_minutiae, 0, kMaxMinutiae);
  v("minutiae", "trace_length", m.trace_length, 2, 64);
  auto& t = c.matcher;
  v("matcher", "root_limit", t.root_limit, 1, 1000000);
  v("matcher", "dist_tol", t.dist_tol, 0.0, 10000.0);
  v("matcher", "angle_tol", t.angle_tol, 0.0, kPi);
  v("matcher", "neighbours", t.neighbours, 1, 32);
  v("matcher", "descriptor_angle_weight", t.descriptor_angle_weight, 0.0, 10000.0);
  v("fusion", "rule", c.fusion.rule, 0, 0);
  v("capture", "max_frames", c.capture.max_frames, 1, 100000000);
  v("capture", "samples_per_finger", c.capture.samples_per_finger, 1, 1000);
}

namespace detail {

template <typename T, typename L>
void check_range(std::string_view section, std::string_view key, const T& value, L lo, L hi) {
  if constexpr (std::is_arithmetic_v<T>) {
    if (!(value >= static_cast<T>(lo) && value <= static_cast<T>(hi))) {
      throw Error(ErrorCode::ConfigError, std::string(section) + "." + std::string(key) + " must lie in [" +
                                              nlohmann::json(lo).dump() + ", " + nlohmann::json(hi).dump() + "]");
    }
  }
}

template <typename T>
void assign_from_json(std::string_view section, std::string_view key, T& field, const nlohmann::json& j) {
  const std::string name = std::string(section) + "." + std::string(key);
  if constexpr (std::is_same_v<T, std::string>) {
    if (!j.is_string()) throw Error(ErrorCode::ConfigError, name + " must be a string");
    field = j.get<std::string>();
  } else if constexpr (std::is_same_v<T, FusionRule>) {
    if (!j.is_string()) throw Error(ErrorCode::ConfigError, name + " must be a string");
    field = parse_fusion_rule(j.get<std::string>());
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw Error(ErrorCode::ConfigError, name + " must be an integer");
    field = j.get<T>();
  } else {
    if (!j.is_number()) throw Error(ErrorCode::ConfigError, name + " must be a number");
    field = j.get<T>();
  }
}

template <typename T>
nlohmann::json field_to_json(const T& field) {
  if constexpr (std::is_same_v<T, FusionRule>) {
    return std::string(to_string(field));
  } else {
    return field;
  }
}

}  // namespace detail

/// Rejects out-of-range values and inconsistent pairs.
inline void validate(const PipelineConfig& cfg) {
  visit_fields(cfg, [](auto section, auto key, auto& field, auto lo, auto hi) {
    detail::check_range(section, key, field, lo, hi);
  });
  if (cfg.segmentation.min_fill > cfg.segmentation.max_fill) {
    throw Error(ErrorCode::ConfigError, "segmentation.min_fill exceeds segmentation.max_fill");
  }
  if (cfg.segmentation.min_aspect > cfg.segmentation.max_aspect) {
    throw Error(ErrorCode::ConfigError, "segmentation.min_aspect exceeds segmentation.max_aspect");
  }
}

inline nlohmann::json to_json(const PipelineConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  visit_fields(cfg, [&](auto section, auto key, auto& field, auto, auto) {
    j[section][key] = detail::field_to_json(field);
  });
  return j;
}

/// Overlays `j` on `base`. Unknown sections or keys are errors.
inline PipelineConfig apply_json(PipelineConfig base, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  const nlohmann::json known = to_json(base);
  for (const auto& [section, body] : j.items()) {
    if (!known.contains(section)) throw Error(ErrorCode::ConfigError, "unknown config section '" + section + "'");
    if (!body.is_object()) throw Error(ErrorCode::ConfigError, "config section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      if (!known[section].contains(key)) {
        throw Error(ErrorCode::ConfigError, "unknown config key '" + section + "." + key + "'");
      }
    }
  }
  visit_fields(base, [&](auto section, auto key, auto& field, auto, auto) {
    if (j.contains(section) && j[section].contains(key)) detail::assign_from_json(section, key, field, j[section][key]);
  });
  validate(base);
  return base;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, "config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return apply_json(PipelineConfig{}, j);
}

/// Applies one `section.key=value` override.
inline PipelineConfig apply_override(PipelineConfig cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq) {
    throw Error(ErrorCode::ConfigError, "override '" + std::string(assignment) + "' is not section.key=value");
  }
  const std::string section(assignment.substr(0, dot));
  const std::string key(assignment.substr(dot + 1, eq - dot - 1));
  const std::string text(assignment.substr(eq + 1));
  bool found = false;
  visit_fields(cfg, [&](auto sec, auto k, auto& field, auto, auto) {
    if (section != sec || key != k) return;
    found = true;
    using T = std::remove_reference_t<decltype(field)>;
    if constexpr (std::is_same_v<T, std::string> || std::is_same_v<T, FusionRule>) {
      detail::assign_from_json(sec, k, field, nlohmann::json(text));
    } else {
      nlohmann::json value;
      try {
        value = nlohmann::json::parse(text);
      } catch (const nlohmann::json::parse_error&) {
        throw Error(ErrorCode::ConfigError, section + "." + key + ": '" + text + "' is not a number");
      }
      detail::assign_from_json(sec, k, field, value);
    }
  });
  if (!found) throw Error(ErrorCode::ConfigError, "unknown config key '" + section + "." + key + "'");
  validate(cfg);
  return cfg;
}

/// Explicit path, else the environment fallback, else defaults.
inline PipelineConfig resolve_config(const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return load_config(*explicit_path);
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return load_config(env);
  return PipelineConfig{};
}

}  // namespace touchprint
