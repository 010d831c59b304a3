// Copyright 2026 The ucmtrack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Pipeline settings as plain "key = value" text.

#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <type_traits>
#include <vector>

#include "ucmtrack/lp_format.hpp"

namespace ucmtrack {

struct PipelineConfig {
  // Inputs and outputs.
  std::string input;  // intensity sequence
  std::string foreground, contour;
  std::vector<std::string> labels;  // label sequences for the ensemble
  std::string gt_labels, gt_tracks, pred_labels, pred_tracks;
  std::string output = "out";

  // Foreground and contour estimation.
  double sigma_low = 1.0;
  double sigma_high = 6.0;
  double contour_sigma = 1.0;

  // Hierarchy filtering.
  std::size_t min_size = 30;
  std::size_t max_size = 2000;
  double strength_threshold = 0.2;

  // Linking.
  std::size_t k = 3;
  double radius = 20.0;
  std::array<double, 3> axis_scale{1.0, 1.0, 1.0};
  double power = 2.0;

  // Tracking.
  double w_alpha = -0.5;
  double w_beta = -0.5;
  double w_delta = -0.25;
  std::size_t window = 50;
  std::size_t overlap = 5;
  double time_limit = 600.0;
  double gap_tolerance = 0.0;
  std::size_t parallelism = 1;

  // Synthetic data.
  std::vector<std::size_t> synth_dims{128, 128};
  std::size_t synth_frames = 30;
  std::size_t synth_cells = 20;
  double synth_motion = 1.0;
  double synth_division = 0.01;
  double synth_radius_min = 5.0;
  double synth_radius_max = 8.0;
  double synth_noise = 0.02;
  std::uint64_t seed = 1;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string s;
    for (const auto& x : p) s += (s.empty() ? "" : "\n") + x;
    return s;
  }
  std::vector<std::string> problems_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
bool parse_number(const std::string& s, T& v) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

struct ConfigKey {
  const char* name;
  const char* help;
  std::function<bool(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <typename T>
ConfigKey number_key(const char* name, const char* help, T PipelineConfig::*field) {
  return {name, help,
          [field](PipelineConfig& c, const std::string& s) { return parse_number(s, c.*field); },
          [field](const PipelineConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return format_number(c.*field);
            else return std::to_string(c.*field);
          }};
}

inline ConfigKey string_key(const char* name, const char* help, std::string PipelineConfig::*field) {
  return {name, help,
          [field](PipelineConfig& c, const std::string& s) {
            c.*field = s;
            return true;
          },
          [field](const PipelineConfig& c) { return c.*field; }};
}

template <typename T, typename Container>
bool parse_list(const std::string& s, Container& out) {
  Container tmp{};
  const auto items = split_list(s);
  if constexpr (requires { tmp.push_back(T{}); }) {
    for (const auto& it : items) {
      T v;
      if (!parse_number(it, v)) return false;
      tmp.push_back(v);
    }
  } else {
    if (items.size() != tmp.size()) return false;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!parse_number(items[i], tmp[i])) return false;
    }
  }
  out = tmp;
  return true;
}

template <typename Container>
std::string format_list(const Container& c) {
  std::string s;
  for (const auto& v : c) {
    if (!s.empty()) s += ",";
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>) s += format_number(v);
    else s += v;
  }
  return s;
}

inline const std::vector<ConfigKey>& config_keys() {
  using C = PipelineConfig;
  static const std::vector<ConfigKey> keys = {
      string_key("input", "intensity sequence (.ucmt)", &C::input),
      string_key("foreground", "foreground sequence (.ucmt, u8)", &C::foreground),
      string_key("contour", "contour sequence (.ucmt, f32)", &C::contour),
      {"labels", "comma-separated label sequences for the ensemble",
       [](C& c, const std::string& s) {
         c.labels = split_list(s);
         return true;
       },
       [](const C& c) { return format_list(c.labels); }},
      string_key("gt_labels", "ground-truth label sequence", &C::gt_labels),
      string_key("gt_tracks", "ground-truth track table", &C::gt_tracks),
      string_key("pred_labels", "predicted label sequence", &C::pred_labels),
      string_key("pred_tracks", "predicted track table", &C::pred_tracks),
      string_key("output", "output directory", &C::output),
      number_key("sigma_low", "fine Gaussian of the difference of Gaussians", &C::sigma_low),
      number_key("sigma_high", "coarse Gaussian of the difference of Gaussians", &C::sigma_high),
      number_key("contour_sigma", "smoothing before the intensity contour map", &C::contour_sigma),
      number_key("min_size", "smallest candidate, pixels", &C::min_size),
      number_key("max_size", "largest candidate, pixels", &C::max_size),
      number_key("strength_threshold", "hide frontiers weaker than this", &C::strength_threshold),
      number_key("k", "links kept per candidate", &C::k),
      number_key("radius", "link search radius, scaled pixels", &C::radius),
      {"axis_scale", "z,y,x factors applied to centroids",
       [](C& c, const std::string& s) { return parse_list<double>(s, c.axis_scale); },
       [](const C& c) { return format_list(c.axis_scale); }},
      number_key("power", "exponent applied to link IoU", &C::power),
      number_key("w_alpha", "appearance weight (<= 0)", &C::w_alpha),
      number_key("w_beta", "disappearance weight (<= 0)", &C::w_beta),
      number_key("w_delta", "division weight (<= 0)", &C::w_delta),
      number_key("window", "frames per window", &C::window),
      number_key("overlap", "frames shared by neighboring windows", &C::overlap),
      number_key("time_limit", "solver time limit per window, seconds", &C::time_limit),
      number_key("gap_tolerance", "accepted objective gap", &C::gap_tolerance),
      number_key("parallelism", "worker threads", &C::parallelism),
      {"synth_dims", "synthetic volume dims, (y,x) or (z,y,x)",
       [](C& c, const std::string& s) { return parse_list<std::size_t>(s, c.synth_dims); },
       [](const C& c) {
         std::string s;
         for (auto d : c.synth_dims) s += (s.empty() ? "" : ",") + std::to_string(d);
         return s;
       }},
      number_key("synth_frames", "synthetic frames", &C::synth_frames),
      number_key("synth_cells", "synthetic cells at the first frame", &C::synth_cells),
      number_key("synth_motion", "synthetic random-walk step", &C::synth_motion),
      number_key("synth_division", "synthetic division probability per frame", &C::synth_division),
      number_key("synth_radius_min", "smallest synthetic cell radius", &C::synth_radius_min),
      number_key("synth_radius_max", "largest synthetic cell radius", &C::synth_radius_max),
      number_key("synth_noise", "synthetic noise standard deviation", &C::synth_noise),
      number_key("seed", "random seed", &C::seed),
  };
  return keys;
}

}  // namespace detail

// Applies one "key=value" setting.
inline void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value,
                             std::vector<std::string>& problems) {
  for (const auto& k : detail::config_keys()) {
    if (key != k.name) continue;
    if (!k.set(cfg, value)) problems.push_back(key + ": cannot parse '" + value + "'");
    return;
  }
  problems.push_back("unknown key '" + key + "'");
}

// Reads "key = value" lines; '#' starts a comment.
inline void read_config(std::istream& in, PipelineConfig& cfg, std::vector<std::string>& problems,
                        const std::string& source = "config") {
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back(source + ":" + std::to_string(n) + ": expected key = value");
      continue;
    }
    set_config_value(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), problems);
  }
}

inline void write_config(std::ostream& out, const PipelineConfig& cfg, bool with_help = true) {
  for (const auto& k : detail::config_keys()) {
    if (with_help) out << "# " << k.help << '\n';
    out << k.name << " = " << k.get(cfg) << '\n';
  }
}

// Every violated cross-field constraint.
inline std::vector<std::string> validate_config(const PipelineConfig& c) {
  std::vector<std::string> p;
  if (!(c.sigma_low >= 0)) p.push_back("sigma_low must be >= 0");
  if (!(c.sigma_low < c.sigma_high)) p.push_back("sigma_low must be smaller than sigma_high");
  if (!(c.contour_sigma >= 0)) p.push_back("contour_sigma must be >= 0");
  if (c.min_size < 1) p.push_back("min_size must be >= 1");
  if (c.min_size > c.max_size) p.push_back("min_size must not exceed max_size");
  if (!(c.strength_threshold >= 0)) p.push_back("strength_threshold must be >= 0");
  if (c.k < 1) p.push_back("k must be >= 1");
  if (!(c.radius > 0)) p.push_back("radius must be > 0");
  for (double s : c.axis_scale) {
    if (!(s > 0)) {
      p.push_back("axis_scale entries must be > 0");
      break;
    }
  }
  if (!(c.power >= 1)) p.push_back("power must be >= 1");
  if (!(c.w_alpha <= 0)) p.push_back("w_alpha must be <= 0");
  if (!(c.w_beta <= 0)) p.push_back("w_beta must be <= 0");
  if (!(c.w_delta <= 0)) p.push_back("w_delta must be <= 0");
  if (c.overlap < 1) p.push_back("overlap must be >= 1");
  if (c.overlap >= c.window) p.push_back("overlap must be smaller than window");
  if (c.window < 3 || c.window < 2 * c.overlap) p.push_back("window must be >= max(3, 2 * overlap)");
  if (!(c.time_limit > 0)) p.push_back("time_limit must be > 0");
  if (!(c.gap_tolerance >= 0)) p.push_back("gap_tolerance must be >= 0");
  if (c.parallelism < 1) p.push_back("parallelism must be >= 1");
  if (c.synth_dims.size() != 2 && c.synth_dims.size() != 3) p.push_back("synth_dims must list 2 or 3 axes");
  for (auto d : c.synth_dims) {
    if (d < 1) {
      p.push_back("synth_dims entries must be >= 1");
      break;
    }
  }
  if (c.synth_frames < 1) p.push_back("synth_frames must be >= 1");
  if (!(c.synth_motion >= 0)) p.push_back("synth_motion must be >= 0");
  if (!(c.synth_division >= 0 && c.synth_division <= 1)) p.push_back("synth_division must be in [0, 1]");
  if (!(c.synth_radius_min >= 1)) p.push_back("synth_radius_min must be >= 1");
  if (!(c.synth_radius_min <= c.synth_radius_max)) p.push_back("synth_radius_min must not exceed synth_radius_max");
  if (!(c.synth_noise >= 0)) p.push_back("synth_noise must be >= 0");
  return p;
}

}  // namespace ucmtrack
