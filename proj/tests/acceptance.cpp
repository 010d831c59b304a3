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

// Acceptance checks. Prints one PASS or FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "ucmtrack/ucmtrack.hpp"

namespace ucmtrack {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// 1. Solver exactness

Outcome solver_exactness() {
  std::mt19937_64 rng(1001);
  const auto start = Clock::now();
  int mismatches = 0, enumerated = 0;
  for (int i = 0; i < 200; ++i) {
    const auto inst = oracle::random_tracking_instance(rng, 1 + rng() % 4, 5);
    const auto m = build_tracking_model(inst.candidates, inst.links, inst.penalties);
    const auto s = solve(m.program);
    // The frame-by-frame oracle enumerates every feasible selection and link
    // set; small models are also enumerated over all raw assignments.
    double want = oracle::tracking_optimum(inst.candidates, inst.links, inst.penalties);
    if (m.program.size() <= 22) {
      const auto e = oracle::enumerate(m.program);
      ++enumerated;
      if (e.best != want) ++mismatches;
    }
    if (s.status != SolveStatus::optimal || s.objective != want) ++mismatches;
  }
  const double t = seconds_since(start);
  return {mismatches == 0 && t < 60, "200 models (" + std::to_string(enumerated) + " fully enumerated), " +
                                         std::to_string(mismatches) + " mismatches, " + fmt(t, 2) + " s"};
}

// ---------------------------------------------------------------------------
// 2. Power flip on the nested pair instance

Outcome power_flip() {
  auto instance = [](double p) {
    CandidateSet set;
    const std::vector<std::pair<std::int32_t, std::int32_t>> nested{{0, 2}, {1, 2}};
    set.frames.push_back(oracle::row_frame(0, 4, {{0, 1}, {2, 3}, {0, 1, 2, 3}}, nested));
    set.frames.push_back(oracle::row_frame(1, 4, {{0, 1}, {2, 3}, {0, 1, 2, 3}}, nested));
    const std::vector<LinkCandidate> links{
        {1, 0, 0, std::pow(0.6, p), 0.6}, {1, 1, 1, std::pow(0.6, p), 0.6}, {1, 2, 2, 1.0, 1.0}};
    const auto m = build_tracking_model(set, links, {});
    auto s = solve(m.program);
    m.canonicalize(s.values);
    std::set<LineageNode> picked;
    for (const auto& n : read_selection(m, s.values).nodes) picked.insert(n);
    return std::pair(picked, s.objective);
  };
  const auto [linear, obj1] = instance(1);
  const auto [squared, obj2] = instance(2);
  const std::set<LineageNode> parts{{0, 0}, {0, 1}, {1, 0}, {1, 1}}, wholes{{0, 2}, {1, 2}};
  const bool ok = linear == parts && squared == wholes && obj1 == 1.2 && obj2 == 1.0;
  return {ok, "p=1 picks " + std::to_string(linear.size()) + " parts (objective " + fmt(obj1) + "), p=2 picks " +
                  std::to_string(squared.size()) + " wholes (objective " + fmt(obj2) + ")"};
}

// ---------------------------------------------------------------------------
// 3. Constraint suite on solved instances

std::optional<std::string> solution_problem(const oracle::TrackingInstance& inst, const TrackingModel& m,
                                            const std::vector<std::uint8_t>& v) {
  auto val = [&](const std::string& name) { return v[static_cast<std::size_t>(*m.find(name))]; };
  const auto first = inst.candidates.first_frame;
  std::map<LineageNode, int> indeg, outdeg;
  for (const auto& l : inst.links) {
    if (!val(link_name(l.frame, l.source, l.target))) continue;
    const LineageNode a{l.frame - 1, l.source}, b{l.frame, l.target};
    if (!val(select_name(a.frame, a.candidate)) || !val(select_name(b.frame, b.candidate))) {
      return "link " + link_name(l.frame, l.source, l.target) + " touches an unselected segment";
    }
    ++outdeg[a];
    ++indeg[b];
  }
  const std::size_t T = inst.candidates.frames.size();
  for (std::size_t lt = 0; lt < T; ++lt) {
    const auto& f = inst.candidates.frames[lt];
    const auto t = first + static_cast<std::int32_t>(lt);
    std::vector<std::uint8_t> covered(f.shape.size(), 0);
    for (std::size_t p = 0; p < f.segments.size(); ++p) {
      const auto q = static_cast<std::int32_t>(p);
      const LineageNode n{t, q};
      const int y = val(select_name(t, q));
      const std::string suffix = "_" + std::to_string(t) + "_" + std::to_string(p);
      const int a = val("a" + suffix), b = val("b" + suffix), d = val("d" + suffix);
      if (!y) {
        if (a || b || d || indeg[n] || outdeg[n]) return "unselected " + select_name(t, q) + " carries flow";
        continue;
      }
      bool overlap = false;
      f.segments[p].for_each_pixel(f.shape, [&](std::size_t px) { overlap |= covered[px]++ != 0; });
      if (overlap) return "selected masks overlap in frame " + std::to_string(t);
      if (indeg[n] > 1) return select_name(t, q) + " has in-degree " + std::to_string(indeg[n]);
      if (outdeg[n] > 2) return select_name(t, q) + " has out-degree " + std::to_string(outdeg[n]);
      if (outdeg[n] == 2 && !d) return select_name(t, q) + " splits without a division flag";
      if (d && outdeg[n] != 2) return select_name(t, q) + " is flagged as dividing with out-degree " + std::to_string(outdeg[n]);
      if (indeg[n] + a != 1) return "inflow of " + select_name(t, q) + " is unbalanced";
      if (outdeg[n] - d + b != 1) return "outflow of " + select_name(t, q) + " is unbalanced";
    }
  }
  if (m.program.first_violation(v)) return "a model row is violated";
  return std::nullopt;
}

Outcome constraint_suite() {
  std::mt19937_64 rng(1003);
  std::size_t violations = 0;
  std::string first;
  for (int i = 0; i < 1000; ++i) {
    const auto inst = oracle::random_tracking_instance(rng, 2 + rng() % 4, 2 + rng() % 4, 6 + rng() % 6);
    const auto m = build_tracking_model(inst.candidates, inst.links, inst.penalties);
    auto s = solve(m.program);
    m.canonicalize(s.values);
    if (const auto p = solution_problem(inst, m, s.values)) {
      if (!violations++) first = " (first: " + *p + ")";
    }
  }
  return {violations == 0, "1000 instances, " + std::to_string(violations) + " violations" + first};
}

// ---------------------------------------------------------------------------
// 4. Hierarchy correctness

Outcome hierarchy_correctness() {
  std::mt19937_64 rng(1005);
  std::size_t bad_maps = 0, bad_lines = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t h = 3 + rng() % 8, w = 3 + rng() % 8;
    ContourMap c({h, w});
    for (auto& x : c.data()) x = static_cast<float>(rng() % 8) / 8.0f;
    std::vector<std::size_t> px(h * w);
    std::iota(px.begin(), px.end(), std::size_t{0});
    const auto g = build_pixel_graph(px, Shape::of(c.dims()), c);
    if (oracle::hierarchy_problem(watershed_by_area(g), g)) ++bad_maps;
  }
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<float> v(2 + rng() % 24);
    const int levels = 2 + static_cast<int>(rng() % 6);
    for (auto& x : v) x = static_cast<float>(rng() % levels) / static_cast<float>(levels);
    const auto g = oracle::line_graph(v);
    if (oracle::edge_saliency(watershed_by_area(g), g) != oracle::flooding_saliency_1d(v)) ++bad_lines;
  }
  return {bad_maps == 0 && bad_lines == 0, "100 maps with " + std::to_string(bad_maps) + " nesting failures, 500 lines with " +
                                               std::to_string(bad_lines) + " flooding mismatches"};
}

// ---------------------------------------------------------------------------
// 5. Linking fidelity

Outcome linking_fidelity() {
  std::mt19937_64 rng(1007);
  const std::size_t side = 12;
  std::size_t iou_bad = 0, topk_bad = 0, pairs = 0;
  while (pairs < 10000) {
    const auto f = oracle::random_frame(rng, 0, 2, side);
    const auto& a = f.segments[0];
    const auto& b = f.segments[1];
    if (compute_iou(a, b) != oracle::naive_iou(oracle::rasterize(a, f.shape), oracle::rasterize(b, f.shape))) ++iou_bad;
    ++pairs;
  }
  for (int trial = 0; trial < 500; ++trial) {
    const auto prev = oracle::random_frame(rng, 0, 1 + rng() % 14, side);
    const auto cur = oracle::random_frame(rng, 1, 1 + rng() % 14, side);
    LinkConfig cfg;
    cfg.k = 1 + rng() % 4;
    cfg.radius = 1.0 + static_cast<double>(rng() % 14);
    cfg.power = 1 + static_cast<double>(rng() % 3);
    const auto got = candidate_links(prev, cur, cfg);
    const auto want = oracle::topk_links(prev, cur, cfg);
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      same = got[i].frame == want[i].frame && got[i].source == want[i].source && got[i].target == want[i].target &&
             got[i].iou == want[i].iou && got[i].weight == want[i].weight;
    }
    if (!same) ++topk_bad;
  }
  return {iou_bad == 0 && topk_bad == 0, "10000 IoU pairs with " + std::to_string(iou_bad) +
                                             " mismatches, 500 top-k frames with " + std::to_string(topk_bad) +
                                             " mismatches"};
}

// ---------------------------------------------------------------------------
// 10. Metric oracles

LabelImage label_rows(const std::vector<std::vector<std::uint16_t>>& frames) {
  std::vector<std::uint16_t> data;
  for (const auto& f : frames) data.insert(data.end(), f.begin(), f.end());
  return LabelImage({frames.size(), 1, frames.at(0).size()}, std::move(data));
}

Outcome metric_oracles() {
  std::vector<std::string> failed;
  // gt of 4 pixels, prediction covers 3 of them plus 1 extra.
  if (seg_score(label_rows({{2, 2, 2, 0, 2}}), label_rows({{1, 1, 1, 1, 0}})) != 3.0 / 5.0) failed.push_back("3/5");
  // Prediction covers 40% of the instance.
  if (seg_score(label_rows({{3, 3, 0, 0, 0}}), label_rows({{1, 1, 1, 1, 1}})) != 0.0) failed.push_back("40%");
  // Two-frame lineage, both nodes found, link missed.
  const auto gt = label_rows({{1, 1, 0}, {1, 1, 0}});
  const auto r = evaluate(label_rows({{1, 1, 0}, {2, 2, 0}}), TrackTable{{{1, 0, 0, 0}, {2, 1, 1, 0}}}, gt,
                          TrackTable{{{1, 0, 1, 0}}});
  if (r.aogm != 1.5 || r.aogm_empty != 21.5 || r.tra != 1.0 - 1.5 / 21.5) failed.push_back("missed link");
  const auto perfect = evaluate(gt, TrackTable{{{1, 0, 1, 0}}}, gt, TrackTable{{{1, 0, 1, 0}}});
  if (perfect.seg != 1 || perfect.tra != 1 || perfect.ctb != 1) failed.push_back("perfect");
  const auto none = evaluate(LabelImage(gt.dims()), TrackTable{}, gt, TrackTable{{{1, 0, 1, 0}}});
  if (none.seg != 0 || none.tra != 0 || none.ctb != 0) failed.push_back("empty");
  ScoreReport mean;
  mean.seg = 0.6;
  mean.tra = 0.8;
  if (std::abs((mean.seg + mean.tra) / 2 - 0.7) > 1e-15 || r.ctb != (r.seg + r.tra) / 2) failed.push_back("ctb");
  std::string detail = "6 hand-computed cases";
  for (const auto& f : failed) detail += ", failed " + f;
  return {failed.empty(), detail};
}

// ---------------------------------------------------------------------------
// Synthetic sequences

struct Sequence {
  SynthResult truth;
  SequenceMaps maps;
};

Sequence synthetic(const PipelineConfig& cfg) {
  Sequence s;
  s.truth = generate_timelapse(synth_config(cfg));
  s.maps = preprocess_sequence(s.truth.intensity, cfg);
  return s;
}

std::size_t division_count(const TrackTable& tracks) {
  std::set<std::uint32_t> parents;
  for (const auto& r : tracks.records) {
    if (r.parent) parents.insert(r.parent);
  }
  return parents.size();
}

LabelImage predicted_labels(const TrackResult& r, const LabelImage& like) {
  return r.lineage.labels.empty() ? LabelImage(like.dims()) : r.lineage.labels;
}

// ---------------------------------------------------------------------------
// 6. End-to-end synthetic

Outcome end_to_end() {
  PipelineConfig cfg;
  cfg.synth_frames = 30;
  cfg.synth_cells = 20;
  cfg.seed = 1;
  cfg.parallelism = 1;
  const auto start = Clock::now();
  const Sequence s = synthetic(cfg);
  const TrackResult r = track_sequence(s.maps, cfg);
  const ScoreReport rep = evaluate(predicted_labels(r, s.truth.labels), r.lineage.tracks, s.truth.labels, s.truth.tracks);
  const double t = seconds_since(start);
  const std::size_t divisions = division_count(s.truth.tracks);
  const bool ok = divisions >= 3 && rep.tra >= 0.95 && rep.seg >= 0.70 && t < 300;
  return {ok, std::to_string(divisions) + " divisions, TRA " + fmt(rep.tra) + ", SEG " + fmt(rep.seg) + ", " +
                  fmt(t, 2) + " s"};
}

// ---------------------------------------------------------------------------
// 7. Windowed against monolithic

Outcome windowed_vs_monolithic() {
  PipelineConfig cfg;
  cfg.synth_frames = 60;
  cfg.seed = 7;
  const Sequence s = synthetic(cfg);
  const CandidateSet set = build_candidates(s.maps, cfg);
  const auto links = build_links(set, cfg);
  const Penalties pen = penalties(cfg);

  const TrackingModel whole = build_tracking_model(set, links, pen);
  auto mono = solve(whole.program);
  whole.canonicalize(mono.values);
  const Selection mono_sel = read_selection(whole, mono.values);

  const WindowSchedule schedule = make_schedule(set.frames.size(), 20, 5);
  std::mutex mu;
  std::set<std::size_t> running;
  std::size_t concurrent_overlaps = 0, max_running = 0;
  WindowedOptions opts;
  opts.parallelism = 2;
  opts.trace = [&](std::size_t w, int, bool started) {
    std::lock_guard lock(mu);
    if (!started) {
      running.erase(w);
      return;
    }
    for (std::size_t o : running) {
      const auto& a = schedule.windows[o];
      const auto& b = schedule.windows[w];
      if (a.start < b.end && b.start < a.end) ++concurrent_overlaps;
    }
    running.insert(w);
    max_running = std::max(max_running, running.size());
  };
  const WindowedResult stitched = solve_windowed(set, links, pen, schedule, opts);
  const double stitched_obj = whole.program.evaluate(assignment_from_selection(whole, stitched.selection));

  const std::set<std::pair<LineageNode, LineageNode>> got(stitched.selection.links.begin(),
                                                          stitched.selection.links.end());
  std::size_t kept = 0;
  for (const auto& l : mono_sel.links) kept += got.count(l);
  const double link_share = mono_sel.links.empty() ? 1.0 : static_cast<double>(kept) / static_cast<double>(mono_sel.links.size());
  const double ratio = stitched_obj / mono.objective;
  const bool ok = mono.status == SolveStatus::optimal && ratio >= 0.98 && link_share >= 0.95 && concurrent_overlaps == 0;
  return {ok, std::to_string(schedule.windows.size()) + " windows, objective ratio " + fmt(ratio, 6) + ", links kept " +
                  fmt(100 * link_share, 2) + "%, overlapping windows in flight " + std::to_string(concurrent_overlaps) +
                  " (peak concurrency " + std::to_string(max_running) + ")"};
}

// ---------------------------------------------------------------------------
// 8. Solver time against window length

Outcome scaling() {
  PipelineConfig cfg;
  cfg.synth_frames = 80;
  cfg.seed = 11;
  const Sequence s = synthetic(cfg);
  const CandidateSet set = build_candidates(s.maps, cfg);
  const auto links = build_links(set, cfg);
  std::vector<double> xs, ys;
  std::string detail;
  for (std::size_t len : {10, 20, 40, 80}) {
    const TimeWindow w{0, len};
    const TrackingModel m =
        build_tracking_model(slice_candidates(set, w), slice_links(links, set.first_frame, w), penalties(cfg));
    // Average over repeated solves until the measurement is long enough.
    std::size_t reps = 0;
    const auto start = Clock::now();
    do {
      (void)solve(m.program);
      ++reps;
    } while (seconds_since(start) < 0.5);
    const double t = seconds_since(start) / static_cast<double>(reps);
    xs.push_back(std::log(static_cast<double>(len)));
    ys.push_back(std::log(t));
    detail += (detail.empty() ? "" : ", ") + std::to_string(len) + " frames " + fmt(1000 * t, 3) + " ms";
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope <= 1.9, "slope " + fmt(slope, 3) + " (" + detail + ")"};
}

// ---------------------------------------------------------------------------
// 9. Ensemble of two corrupted label sources

using Pixel = std::pair<std::size_t, std::size_t>;

std::map<std::uint16_t, std::vector<Pixel>> instances(const LabelImage& labels, std::size_t t) {
  const std::size_t h = labels.dims()[1], w = labels.dims()[2];
  std::map<std::uint16_t, std::vector<Pixel>> out;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      if (const auto v = labels[(t * h + y) * w + x]) out[v].push_back({y, x});
  return out;
}

std::array<double, 2> centroid_of(const std::vector<Pixel>& px) {
  std::array<double, 2> c{0, 0};
  for (const auto& [y, x] : px) {
    c[0] += static_cast<double>(y);
    c[1] += static_cast<double>(x);
  }
  return {c[0] / static_cast<double>(px.size()), c[1] / static_cast<double>(px.size())};
}

// Cuts a random share of the instances of every frame into two halves along
// a random line through the centroid. Pixels on the line become background.
LabelImage split_source(const LabelImage& gt, std::mt19937_64& rng, double share) {
  LabelImage out = gt;
  const std::size_t h = gt.dims()[1], w = gt.dims()[2];
  std::bernoulli_distribution pick(share);
  std::uniform_real_distribution<double> angle(0, 2 * std::acos(-1.0));
  for (std::size_t t = 0; t < gt.frame_count(); ++t) {
    std::uint16_t next = 30000;
    for (const auto& [label, px] : instances(gt, t)) {
      if (!pick(rng)) continue;
      const auto c = centroid_of(px);
      const double a = angle(rng);
      ++next;
      for (const auto& [y, x] : px) {
        const double side = (static_cast<double>(y) - c[0]) * std::sin(a) + (static_cast<double>(x) - c[1]) * std::cos(a);
        if (std::abs(side) <= 0.5) out[(t * h + y) * w + x] = 0;
        else if (side > 0) out[(t * h + y) * w + x] = next;
      }
    }
  }
  return out;
}

// Joins a random share of the instances of every frame with their nearest
// neighbor, filling the background between the two.
LabelImage merge_source(const LabelImage& gt, std::mt19937_64& rng, double share, double reach) {
  LabelImage out = gt;
  const std::size_t h = gt.dims()[1], w = gt.dims()[2];
  std::bernoulli_distribution pick(share);
  for (std::size_t t = 0; t < gt.frame_count(); ++t) {
    const auto inst = instances(gt, t);
    std::set<std::uint16_t> used;
    for (const auto& [a, pa] : inst) {
      if (used.count(a) || !pick(rng)) continue;
      const auto ca = centroid_of(pa);
      std::uint16_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (const auto& [b, pb] : inst) {
        if (b == a || used.count(b)) continue;
        const auto cb = centroid_of(pb);
        const double d = std::hypot(ca[0] - cb[0], ca[1] - cb[1]);
        if (d < best_d) best_d = d, best = b;
      }
      if (!best) continue;
      const auto& pb = inst.at(best);
      auto distance = [](const std::vector<Pixel>& px, double y, double x) {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& [py, pxx] : px) m = std::min(m, std::hypot(static_cast<double>(py) - y, static_cast<double>(pxx) - x));
        return m;
      };
      std::size_t y0 = h, y1 = 0, x0 = w, x1 = 0;
      for (const auto* px : {&pa, &pb}) {
        for (const auto& [y, x] : *px) {
          y0 = std::min(y0, y), y1 = std::max(y1, y), x0 = std::min(x0, x), x1 = std::max(x1, x);
        }
      }
      std::vector<std::size_t> bridge;
      for (std::size_t y = y0; y <= y1; ++y)
        for (std::size_t x = x0; x <= x1; ++x) {
          const std::size_t i = (t * h + y) * w + x;
          if (gt[i]) continue;
          const auto fy = static_cast<double>(y), fx = static_cast<double>(x);
          if (distance(pa, fy, fx) <= reach && distance(pb, fy, fx) <= reach) bridge.push_back(i);
        }
      if (bridge.empty()) continue;
      for (std::size_t i : bridge) out[i] = a;
      for (const auto& [y, x] : pb) out[(t * h + y) * w + x] = a;
      used.insert(a);
      used.insert(best);
    }
  }
  return out;
}

Outcome ensemble_direction() {
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    PipelineConfig cfg;
    cfg.synth_frames = 12;
    cfg.synth_cells = 20;
    cfg.seed = seed;
    cfg.time_limit = 20;
    SynthConfig sc = synth_config(cfg);
    sc.gap = 0.5;
    const SynthResult truth = generate_timelapse(sc);
    std::mt19937_64 rng(1000 + seed);
    const LabelImage split = split_source(truth.labels, rng, 0.4);
    const LabelImage merged = merge_source(truth.labels, rng, 0.4, 1.0);
    auto pipeline_seg = [&](const std::vector<LabelImage>& sources) {
      const TrackResult r = track_sequence(ensemble_sequences(sources), cfg);
      return seg_score(predicted_labels(r, truth.labels), truth.labels);
    };
    const double seg_split = pipeline_seg({split});
    const double seg_merged = pipeline_seg({merged});
    const double seg_both = pipeline_seg({split, merged});
    ok = ok && seg_both >= std::max(seg_split, seg_merged);
    if (!detail.empty()) detail += "; ";
    detail += "seed " + std::to_string(seed) + " ensemble " + fmt(seg_both) + ", split " + fmt(seg_split) + ", merged " +
              fmt(seg_merged);
  }
  return {ok, "SEG " + detail};
}

}  // namespace
}  // namespace ucmtrack

// Runs every criterion, or only those numbered on the command line.
int main(int argc, char** argv) {
  using namespace ucmtrack;
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(static_cast<std::size_t>(std::stoul(argv[i])));
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"solver exactness", solver_exactness},
      {"power flip", power_flip},
      {"constraint suite", constraint_suite},
      {"hierarchy correctness", hierarchy_correctness},
      {"linking fidelity", linking_fidelity},
      {"end-to-end synthetic", end_to_end},
      {"windowed vs monolithic", windowed_vs_monolithic},
      {"solver scaling", scaling},
      {"ensemble direction", ensemble_direction},
      {"metric oracles", metric_oracles},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    Outcome o;
    const auto start = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " " << criteria[i].first << ": " << o.detail << " ["
              << fmt(seconds_since(start), 1) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
