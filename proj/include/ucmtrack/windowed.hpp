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

// Solving long sequences in overlapping time windows.
//
// Even windows are solved first and independently. Each odd window is then
// solved with its first frame pinned to the left even neighbor and its last
// frame (selection and incoming links) pinned to the right one. Every frame
// is committed by exactly one window:
//
//   even i : [e(i-1) - 1, s(i+1) + 1)
//   odd  j : [s(j) + 1,   e(j) - 1)
//
// with the outer ends clipped to the sequence.

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucmtrack/lineage.hpp"
#include "ucmtrack/parallel.hpp"
#include "ucmtrack/solver.hpp"
#include "ucmtrack/tracking_model.hpp"

namespace ucmtrack {

struct TimeWindow {
  std::size_t start = 0, end = 0;  // frames [start, end) relative to the sequence
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

struct WindowSchedule {
  std::size_t frames = 0, length = 0, overlap = 0;
  std::vector<TimeWindow> windows;
  std::vector<TimeWindow> committed;  // per window

  static bool even(std::size_t i) { return i % 2 == 0; }
};

inline WindowSchedule make_schedule(std::size_t frames, std::size_t length, std::size_t overlap) {
  if (frames < 1) throw std::invalid_argument("schedule: sequence has no frames");
  if (overlap < 1) throw std::invalid_argument("schedule: overlap must be >= 1");
  if (overlap >= length) throw std::invalid_argument("schedule: overlap must be smaller than the window");
  WindowSchedule s{frames, length, overlap, {}, {}};
  for (std::size_t start = 0;; start += length - overlap) {
    const std::size_t end = std::min(start + length, frames);
    s.windows.push_back({start, end});
    if (end == frames) break;
  }
  if (s.windows.size() > 1) {
    // Windows of equal parity must not share frames, and every window keeps
    // at least one frame of its own.
    if (length < 3 || length < 2 * overlap) {
      throw std::invalid_argument("schedule: window " + std::to_string(length) + " too short for overlap " +
                                  std::to_string(overlap) + " (need window >= max(3, 2*overlap))");
    }
  }
  const std::size_t n = s.windows.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& w = s.windows[i];
    TimeWindow c;
    if (WindowSchedule::even(i)) {
      c.start = i == 0 ? 0 : s.windows[i - 1].end - 1;
      c.end = i + 1 == n ? frames : s.windows[i + 1].start + 1;
    } else {
      c.start = w.start + 1;
      c.end = i + 1 == n ? frames : w.end - 1;
    }
    s.committed.push_back(c);
  }
  return s;
}

struct WindowReport {
  std::size_t window = 0;
  int pass = 1;
  SolveStatus status = SolveStatus::unknown;
  double objective = 0;
  std::uint64_t nodes = 0;
  double seconds = 0;
};

struct WindowedOptions {
  std::size_t parallelism = 1;
  SolveOptions solve;
  // Called with (window, pass, started) around each window solve.
  std::function<void(std::size_t, int, bool)> trace;
  std::function<void(const std::string&)> log;
};

struct WindowedResult {
  Selection selection;
  std::vector<WindowReport> reports;
};

class StitchError : public std::runtime_error {
 public:
  StitchError(const std::string& what, std::size_t frame)
      : std::runtime_error(what), frame_(frame) {}
  std::size_t frame() const { return frame_; }

 private:
  std::size_t frame_;
};

inline CandidateSet slice_candidates(const CandidateSet& all, const TimeWindow& w) {
  CandidateSet out;
  out.first_frame = all.first_frame + static_cast<std::int32_t>(w.start);
  out.frames.assign(all.frames.begin() + static_cast<std::ptrdiff_t>(w.start),
                    all.frames.begin() + static_cast<std::ptrdiff_t>(w.end));
  return out;
}

inline std::vector<LinkCandidate> slice_links(const std::vector<LinkCandidate>& links, std::int32_t first,
                                              const TimeWindow& w) {
  std::vector<LinkCandidate> out;
  const auto lo = first + static_cast<std::int32_t>(w.start) + 1;
  const auto hi = first + static_cast<std::int32_t>(w.end);
  for (const auto& l : links) {
    if (l.frame >= lo && l.frame < hi) out.push_back(l);
  }
  return out;
}

// Full assignment of `model` realizing a selection: appearance, disappearance
// and division follow from the links.
inline std::vector<std::uint8_t> assignment_from_selection(const TrackingModel& m, const Selection& sel) {
  std::vector<std::uint8_t> values(m.program.size(), 0);
  std::map<LineageNode, int> indeg, outdeg;
  for (const auto& [a, b] : sel.links) {
    const auto v = m.find(link_name(b.frame, a.candidate, b.candidate));
    if (!v) throw std::invalid_argument("selection uses a link missing from the model");
    values[static_cast<std::size_t>(*v)] = 1;
    ++outdeg[a];
    ++indeg[b];
  }
  for (const auto& n : sel.nodes) {
    const auto lt = static_cast<std::size_t>(n.frame - m.first_frame);
    const auto p = static_cast<std::size_t>(n.candidate);
    values[static_cast<std::size_t>(m.select[lt][p])] = 1;
    if (indeg[n] == 0) values[static_cast<std::size_t>(m.appear[lt][p])] = 1;
    const int od = outdeg[n];
    if (od == 0) values[static_cast<std::size_t>(m.disappear[lt][p])] = 1;
    if (od == 2) values[static_cast<std::size_t>(m.divide[lt][p])] = 1;
  }
  return values;
}

inline WindowedResult solve_windowed(const CandidateSet& candidates, const std::vector<LinkCandidate>& links,
                                     const Penalties& penalties, const WindowSchedule& schedule,
                                     const WindowedOptions& opts = {}) {
  if (schedule.frames != candidates.frames.size()) {
    throw std::invalid_argument("schedule covers " + std::to_string(schedule.frames) + " frames, sequence has " +
                                std::to_string(candidates.frames.size()));
  }
  const std::size_t n = schedule.windows.size();
  std::vector<TrackingModel> models(n);
  std::vector<Solution> solutions(n);
  WindowedResult result;
  result.reports.resize(n);

  auto run = [&](std::size_t i, int pass, const std::vector<Pin>& pins) {
    const auto& w = schedule.windows[i];
    if (opts.trace) opts.trace(i, pass, true);
    const CandidateSet sub = slice_candidates(candidates, w);
    const auto sub_links = slice_links(links, candidates.first_frame, w);
    models[i] = build_tracking_model(sub, sub_links, penalties, pins);
    solutions[i] = solve(models[i].program, opts.solve);
    models[i].canonicalize(solutions[i].values);
    solutions[i].objective = models[i].program.evaluate(solutions[i].values);
    auto& r = result.reports[i];
    r = {i, pass, solutions[i].status, solutions[i].objective, solutions[i].nodes, solutions[i].wall_seconds};
    if (opts.trace) opts.trace(i, pass, false);
  };
  auto log = [&](std::size_t i) {
    if (!opts.log) return;
    const auto& r = result.reports[i];
    opts.log("window " + std::to_string(i) + " pass " + std::to_string(r.pass) + " status " +
             to_string(r.status) + " objective " + std::to_string(r.objective));
  };

  std::vector<std::size_t> evens, odds;
  for (std::size_t i = 0; i < n; ++i) (WindowSchedule::even(i) ? evens : odds).push_back(i);

  parallel_for(evens.size(), opts.parallelism, [&](std::size_t k) { run(evens[k], 1, {}); });
  for (std::size_t i : evens) log(i);

  auto value_of = [&](std::size_t i, const std::string& name) -> std::uint8_t {
    const auto v = models[i].find(name);
    return v ? solutions[i].values[static_cast<std::size_t>(*v)] : 0;
  };
  auto pins_for = [&](std::size_t j) {
    std::vector<Pin> pins;
    const auto first = candidates.first_frame;
    const auto& w = schedule.windows[j];
    auto pin_frame = [&](std::size_t nb, std::size_t f, bool incoming) {
      const auto t = first + static_cast<std::int32_t>(f);
      for (std::size_t p = 0; p < candidates.frames[f].segments.size(); ++p) {
        const auto name = select_name(t, static_cast<std::int32_t>(p));
        pins.push_back({name, value_of(nb, name)});
      }
      if (!incoming) return;
      for (const auto& l : links) {
        if (l.frame != t) continue;
        const auto name = link_name(l.frame, l.source, l.target);
        pins.push_back({name, value_of(nb, name)});
      }
    };
    pin_frame(j - 1, w.start, false);
    if (j + 1 < n) {
      const std::size_t f = w.end - 1;
      pin_frame(j + 1, f, f >= schedule.windows[j + 1].start + 1 && f >= w.start + 1);
    }
    return pins;
  };

  std::vector<std::vector<Pin>> odd_pins(odds.size());
  for (std::size_t k = 0; k < odds.size(); ++k) odd_pins[k] = pins_for(odds[k]);
  parallel_for(odds.size(), opts.parallelism, [&](std::size_t k) { run(odds[k], 2, odd_pins[k]); });
  for (std::size_t k = 0; k < odds.size(); ++k) {
    const std::size_t j = odds[k];
    log(j);
    if (solutions[j].status == SolveStatus::infeasible || solutions[j].status == SolveStatus::unknown) {
      const auto& w = schedule.windows[j];
      throw StitchError("window " + std::to_string(j) + " has no solution under the pins at stitch frames " +
                            std::to_string(w.start) + " and " + std::to_string(w.end - 1),
                        w.start);
    }
  }

  // Stitch.
  std::vector<std::size_t> owner(schedule.frames);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = schedule.committed[i].start; f < schedule.committed[i].end; ++f) owner[f] = i;
  }
  std::vector<Selection> local(n);
  for (std::size_t i = 0; i < n; ++i) local[i] = read_selection(models[i], solutions[i].values);
  const auto first = candidates.first_frame;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& node : local[i].nodes) {
      if (owner[static_cast<std::size_t>(node.frame - first)] == i) result.selection.nodes.push_back(node);
    }
    for (const auto& link : local[i].links) {
      const auto t = static_cast<std::size_t>(link.second.frame - first);
      const std::size_t own = owner[t];
      const std::size_t src = schedule.windows[own].start < t ? own : owner[t - 1];
      if (src == i) result.selection.links.push_back(link);
    }
  }
  std::sort(result.selection.nodes.begin(), result.selection.nodes.end());
  std::sort(result.selection.links.begin(), result.selection.links.end());
  return result;
}

}  // namespace ucmtrack
