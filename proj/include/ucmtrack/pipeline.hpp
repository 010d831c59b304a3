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

// Whole-sequence stages, shared by the command line tool and embedders.

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucmtrack/config.hpp"
#include "ucmtrack/hierarchy.hpp"
#include "ucmtrack/lineage.hpp"
#include "ucmtrack/linking.hpp"
#include "ucmtrack/metrics.hpp"
#include "ucmtrack/parallel.hpp"
#include "ucmtrack/preprocess.hpp"
#include "ucmtrack/synth.hpp"
#include "ucmtrack/tracking_model.hpp"
#include "ucmtrack/windowed.hpp"

namespace ucmtrack {

// Foreground and contour sequences, each (t, [z,] y, x).
struct SequenceMaps {
  ForegroundMask foreground;
  ContourMap contour;
};

inline void check_sequence_dims(const std::vector<std::size_t>& dims, const char* what) {
  if (dims.size() != 3 && dims.size() != 4) {
    throw std::invalid_argument(std::string(what) + ": expected (t, y, x) or (t, z, y, x), got " +
                                std::to_string(dims.size()) + " axes");
  }
}

inline FilterParams filter_params(const PipelineConfig& c) {
  return {c.min_size, c.max_size, c.strength_threshold};
}

inline LinkConfig link_config(const PipelineConfig& c) {
  LinkConfig l;
  l.k = c.k;
  l.radius = c.radius;
  l.axis_scale = c.axis_scale;
  l.power = c.power;
  return l;
}

inline Penalties penalties(const PipelineConfig& c) { return {c.w_alpha, c.w_beta, c.w_delta}; }

template <typename T>
SequenceMaps preprocess_sequence(const Tensor<T>& intensity, const PipelineConfig& cfg) {
  check_sequence_dims(intensity.dims(), "intensity");
  const std::size_t T_ = intensity.frame_count();
  std::vector<ForegroundMask> fg(T_);
  std::vector<ContourMap> ct(T_);
  parallel_for(T_, cfg.parallelism, [&](std::size_t t) {
    const auto frame = intensity.frame(t);
    fg[t] = detect_foreground(frame, cfg.sigma_low, cfg.sigma_high).mask;
    ct[t] = intensity_to_contour(frame, cfg.contour_sigma);
  });
  return {stack_frames(fg), stack_frames(ct)};
}

inline SequenceMaps ensemble_sequences(const std::vector<LabelImage>& sources, std::size_t parallelism = 1) {
  if (sources.empty()) throw std::invalid_argument("ensemble: no label sources");
  for (const auto& s : sources) {
    check_sequence_dims(s.dims(), "labels");
    if (s.dims() != sources[0].dims()) throw std::invalid_argument("ensemble: label sources differ in dims");
  }
  const std::size_t T_ = sources[0].frame_count();
  std::vector<ForegroundMask> fg(T_);
  std::vector<ContourMap> ct(T_);
  parallel_for(T_, parallelism, [&](std::size_t t) {
    std::vector<ForegroundContour> maps;
    for (const auto& s : sources) maps.push_back(labels_to_maps(s.frame(t)));
    auto combined = ensemble_combine(maps);
    fg[t] = std::move(combined.foreground);
    ct[t] = std::move(combined.contour);
  });
  return {stack_frames(fg), stack_frames(ct)};
}

inline CandidateSet build_candidates(const SequenceMaps& maps, const PipelineConfig& cfg) {
  check_sequence_dims(maps.foreground.dims(), "foreground");
  if (maps.foreground.dims() != maps.contour.dims()) {
    throw std::invalid_argument("foreground and contour sequences differ in dims");
  }
  CandidateSet set;
  set.frames.resize(maps.foreground.frame_count());
  const auto params = filter_params(cfg);
  parallel_for(set.frames.size(), cfg.parallelism, [&](std::size_t t) {
    set.frames[t] = extract_frame_candidates(maps.foreground.frame(t), maps.contour.frame(t),
                                             static_cast<std::int32_t>(t), params);
  });
  return set;
}

inline std::vector<LinkCandidate> build_links(const CandidateSet& set, const PipelineConfig& cfg) {
  const std::size_t T_ = set.frames.size();
  std::vector<std::vector<LinkCandidate>> per(T_);
  const auto lc = link_config(cfg);
  parallel_for(T_ > 0 ? T_ - 1 : 0, cfg.parallelism,
               [&](std::size_t i) { per[i + 1] = candidate_links(set.frames[i], set.frames[i + 1], lc); });
  std::vector<LinkCandidate> links;
  for (auto& v : per) links.insert(links.end(), v.begin(), v.end());
  return links;
}

struct TrackResult {
  Lineage lineage;
  Selection selection;
  double objective = 0;  // of the stitched selection under the whole-sequence model
  std::size_t candidates = 0;
  std::size_t links = 0;
  std::vector<WindowReport> reports;
};

inline TrackResult track_sequence(const SequenceMaps& maps, const PipelineConfig& cfg,
                                  const std::function<void(const std::string&)>& log = {}) {
  if (const auto problems = validate_config(cfg); !problems.empty()) throw ConfigError(problems);
  const CandidateSet set = build_candidates(maps, cfg);
  const auto links = build_links(set, cfg);
  const auto schedule = make_schedule(set.frames.size(), cfg.window, cfg.overlap);
  WindowedOptions opts;
  opts.parallelism = cfg.parallelism;
  opts.solve.time_limit_seconds = cfg.time_limit;
  opts.solve.gap_tolerance = cfg.gap_tolerance;
  opts.log = log;
  WindowedResult solved = solve_windowed(set, links, penalties(cfg), schedule, opts);
  TrackResult out;
  for (const auto& f : set.frames) out.candidates += f.segments.size();
  out.links = links.size();
  out.reports = std::move(solved.reports);
  out.selection = std::move(solved.selection);
  const TrackingModel whole = build_tracking_model(set, links, penalties(cfg));
  out.objective = whole.program.evaluate(assignment_from_selection(whole, out.selection));
  out.lineage = build_lineage(out.selection, set);
  return out;
}

// Array-in entry point: foreground and contour sequences to labels and tracks.
inline TrackResult track_arrays(const ForegroundMask& foreground, const ContourMap& contour,
                                const PipelineConfig& cfg) {
  if (foreground.dims() != contour.dims()) {
    for (std::size_t a = 0; a < std::max(foreground.ndim(), contour.ndim()); ++a) {
      const std::size_t f = a < foreground.ndim() ? foreground.dims()[a] : 0;
      const std::size_t c = a < contour.ndim() ? contour.dims()[a] : 0;
      if (f != c) {
        throw std::invalid_argument("track: foreground and contour differ on axis " + std::to_string(a) + " (" +
                                    std::to_string(f) + " vs " + std::to_string(c) + ")");
      }
    }
  }
  return track_sequence({foreground, contour}, cfg);
}

inline ScoreReport evaluate_arrays(const LabelImage& pred, const TrackTable& pred_tracks, const LabelImage& gt,
                                   const TrackTable& gt_tracks) {
  return evaluate(pred, pred_tracks, gt, gt_tracks);
}

inline SynthConfig synth_config(const PipelineConfig& c) {
  SynthConfig s;
  s.dims = c.synth_dims;
  s.frames = c.synth_frames;
  s.cells = c.synth_cells;
  s.motion_sigma = c.synth_motion;
  s.division_probability = c.synth_division;
  s.radius_min = c.synth_radius_min;
  s.radius_max = c.synth_radius_max;
  s.noise_sigma = c.synth_noise;
  s.seed = c.seed;
  return s;
}

}  // namespace ucmtrack
