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

// SEG, TRA (AOGM based) and CTB scores of a predicted lineage.
//
// A ground-truth instance is matched to the predicted instance of the same
// frame that covers more than half of its pixels.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ucmtrack/io.hpp"
#include "ucmtrack/tensor.hpp"

namespace ucmtrack {

// Operation weights of the acyclic oriented graph matching measure.
struct AogmWeights {
  double split = 5;        // NS
  double add_node = 10;    // FN
  double delete_node = 1;  // FP
  double delete_edge = 1;  // ED
  double add_edge = 1.5;   // EA
  double edge_kind = 1;    // EC
};

struct FrameDetail {
  std::size_t matched = 0;
  std::size_t missed = 0;
  std::size_t spurious = 0;
};

struct AogmCounts {
  std::size_t split = 0, add_node = 0, delete_node = 0, delete_edge = 0, add_edge = 0, edge_kind = 0;
};

struct ScoreReport {
  double seg = 0, tra = 0, ctb = 0;
  double aogm = 0, aogm_empty = 0;
  AogmCounts ops;
  std::vector<FrameDetail> frames;
};

class MetricsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

// Overlaps between ground-truth and predicted instances of one frame.
struct FrameOverlap {
  std::map<std::uint16_t, std::size_t> gt_area, pred_area;
  std::map<std::pair<std::uint16_t, std::uint16_t>, std::size_t> common;  // (gt, pred)
  std::map<std::uint16_t, std::uint16_t> match;                           // gt -> pred
};

inline std::vector<FrameOverlap> frame_overlaps(const LabelImage& pred, const LabelImage& gt) {
  if (pred.dims() != gt.dims()) throw MetricsError("metrics: prediction and ground truth dims differ");
  if (gt.ndim() < 2) throw MetricsError("metrics: label images need a leading time axis");
  const std::size_t T = gt.frame_count();
  const std::size_t per = gt.size() / T;
  std::vector<FrameOverlap> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    auto& f = out[t];
    for (std::size_t i = t * per; i < (t + 1) * per; ++i) {
      const std::uint16_t g = gt[i], p = pred[i];
      if (g) ++f.gt_area[g];
      if (p) ++f.pred_area[p];
      if (g && p) ++f.common[{g, p}];
    }
    for (const auto& [key, n] : f.common) {
      if (2 * n <= f.gt_area[key.first]) continue;
      if (!f.match.emplace(key.first, key.second).second) {
        throw std::logic_error("metrics: two predictions cover more than half of one instance");
      }
    }
  }
  return out;
}

struct Node {
  std::uint16_t label;
  std::uint32_t frame;
  friend auto operator<=>(const Node&, const Node&) = default;
};

enum class EdgeKind : std::uint8_t { continuation, division };

// Temporal edges implied by masks and a track table: consecutive occurrences
// of a label, and parent's last occurrence to child's first occurrence.
inline std::map<std::pair<Node, Node>, EdgeKind> lineage_edges(const std::vector<FrameOverlap>& frames,
                                                               bool use_gt, const TrackTable& tracks) {
  std::map<std::uint16_t, std::vector<std::uint32_t>> seen;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    for (const auto& [label, area] : use_gt ? frames[t].gt_area : frames[t].pred_area) {
      seen[label].push_back(static_cast<std::uint32_t>(t));
    }
  }
  std::map<std::pair<Node, Node>, EdgeKind> edges;
  for (const auto& [label, ts] : seen) {
    for (std::size_t i = 1; i < ts.size(); ++i) {
      edges[{{label, ts[i - 1]}, {label, ts[i]}}] = EdgeKind::continuation;
    }
  }
  for (const auto& r : tracks.records) {
    if (r.parent == 0) continue;
    const auto child = seen.find(static_cast<std::uint16_t>(r.label));
    const auto parent = seen.find(static_cast<std::uint16_t>(r.parent));
    if (child == seen.end() || parent == seen.end()) continue;
    edges[{{static_cast<std::uint16_t>(r.parent), parent->second.back()},
           {static_cast<std::uint16_t>(r.label), child->second.front()}}] = EdgeKind::division;
  }
  return edges;
}

}  // namespace detail

// Mean IoU over all ground-truth instances; unmatched instances count 0.
// Without any ground-truth instance the score is 0.
inline double seg_score(const LabelImage& pred, const LabelImage& gt) {
  const auto frames = detail::frame_overlaps(pred, gt);
  double sum = 0;
  std::size_t count = 0;
  for (const auto& f : frames) {
    for (const auto& [g, area] : f.gt_area) {
      ++count;
      const auto m = f.match.find(g);
      if (m == f.match.end()) continue;
      const std::size_t inter = f.common.at({g, m->second});
      sum += static_cast<double>(inter) / static_cast<double>(area + f.pred_area.at(m->second) - inter);
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

inline ScoreReport evaluate(const LabelImage& pred, const TrackTable& pred_tracks, const LabelImage& gt,
                            const TrackTable& gt_tracks, const AogmWeights& w = {}) {
  ScoreReport rep;
  const auto frames = detail::frame_overlaps(pred, gt);
  rep.seg = seg_score(pred, gt);
  rep.frames.resize(frames.size());

  // Node operations.
  std::map<detail::Node, std::size_t> pred_matches;  // pred node -> number of gt nodes
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& f = frames[t];
    auto& d = rep.frames[t];
    for (const auto& [p, area] : f.pred_area) pred_matches[{p, static_cast<std::uint32_t>(t)}] = 0;
    for (const auto& [g, area] : f.gt_area) {
      const auto m = f.match.find(g);
      if (m == f.match.end()) {
        ++d.missed;
        ++rep.ops.add_node;
        continue;
      }
      ++d.matched;
      ++pred_matches[{m->second, static_cast<std::uint32_t>(t)}];
    }
    for (const auto& [p, area] : f.pred_area) {
      if (pred_matches[{p, static_cast<std::uint32_t>(t)}] == 0) ++d.spurious;
    }
  }
  for (const auto& [node, k] : pred_matches) {
    if (k == 0) ++rep.ops.delete_node;
    if (k > 1) rep.ops.split += k - 1;
  }

  // Edge operations.
  const auto gt_edges = detail::lineage_edges(frames, true, gt_tracks);
  const auto pred_edges = detail::lineage_edges(frames, false, pred_tracks);
  auto image = [&](const detail::Node& g) -> std::optional<detail::Node> {
    const auto& m = frames[g.frame].match;
    const auto it = m.find(g.label);
    if (it == m.end()) return std::nullopt;
    return detail::Node{it->second, g.frame};
  };
  std::map<std::pair<detail::Node, detail::Node>, bool> explained;  // pred edges with a gt counterpart
  for (const auto& [e, kind] : gt_edges) {
    const auto a = image(e.first), b = image(e.second);
    if (!a || !b) {
      ++rep.ops.add_edge;
      continue;
    }
    const auto it = pred_edges.find({*a, *b});
    if (it == pred_edges.end()) {
      ++rep.ops.add_edge;
      continue;
    }
    explained[{*a, *b}] = true;
    if (it->second != kind) ++rep.ops.edge_kind;
  }
  for (const auto& [e, kind] : pred_edges) {
    if (explained.count(e)) continue;
    if (pred_matches[e.first] == 1 && pred_matches[e.second] == 1) ++rep.ops.delete_edge;
  }

  rep.aogm = w.split * static_cast<double>(rep.ops.split) + w.add_node * static_cast<double>(rep.ops.add_node) +
             w.delete_node * static_cast<double>(rep.ops.delete_node) +
             w.delete_edge * static_cast<double>(rep.ops.delete_edge) +
             w.add_edge * static_cast<double>(rep.ops.add_edge) +
             w.edge_kind * static_cast<double>(rep.ops.edge_kind);
  std::size_t gt_nodes = 0;
  for (const auto& f : frames) gt_nodes += f.gt_area.size();
  rep.aogm_empty = w.add_node * static_cast<double>(gt_nodes) + w.add_edge * static_cast<double>(gt_edges.size());
  rep.tra = rep.aogm_empty > 0 ? 1.0 - std::min(rep.aogm, rep.aogm_empty) / rep.aogm_empty : 0.0;
  rep.ctb = (rep.seg + rep.tra) / 2;
  return rep;
}

inline double tra_score(const LabelImage& pred, const TrackTable& pred_tracks, const LabelImage& gt,
                        const TrackTable& gt_tracks) {
  return evaluate(pred, pred_tracks, gt, gt_tracks).tra;
}

inline void write_report(std::ostream& out, const ScoreReport& r) {
  std::ostringstream s;
  s.precision(6);
  s << std::fixed;
  s << "SEG " << r.seg << "\nTRA " << r.tra << "\nCTB " << r.ctb << "\n";
  s << "AOGM " << r.aogm << " of " << r.aogm_empty << " (split " << r.ops.split << ", add node " << r.ops.add_node
    << ", delete node " << r.ops.delete_node << ", delete edge " << r.ops.delete_edge << ", add edge "
    << r.ops.add_edge << ", edge kind " << r.ops.edge_kind << ")\n";
  for (std::size_t t = 0; t < r.frames.size(); ++t) {
    s << "frame " << t << " matched " << r.frames[t].matched << " missed " << r.frames[t].missed << " spurious "
      << r.frames[t].spurious << "\n";
  }
  s << "seg=" << r.seg << "\ntra=" << r.tra << "\nctb=" << r.ctb << "\naogm=" << r.aogm
    << "\naogm_empty=" << r.aogm_empty << "\n";
  out << s.str();
}

}  // namespace ucmtrack
