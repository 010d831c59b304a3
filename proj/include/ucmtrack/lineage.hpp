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

// Turning a tracking assignment into tracks and label images.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ucmtrack/hierarchy.hpp"
#include "ucmtrack/io.hpp"
#include "ucmtrack/tracking_model.hpp"

namespace ucmtrack {

class LineageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LineageNode {
  std::int32_t frame = 0;      // absolute
  std::int32_t candidate = 0;  // index within the frame
  friend auto operator<=>(const LineageNode&, const LineageNode&) = default;
};

struct LineageGraph {
  std::vector<LineageNode> nodes;                        // frame-major, candidate order
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;  // node indices, earlier -> later
  std::vector<std::uint32_t> track_of_node;              // label per node
};

struct Lineage {
  LineageGraph graph;
  TrackTable tracks;
  LabelImage labels;  // (t, spatial...)
};

// Selected nodes and the links between them, from a full assignment.
struct Selection {
  std::vector<LineageNode> nodes;
  std::vector<std::pair<LineageNode, LineageNode>> links;
};

inline Selection read_selection(const TrackingModel& m, const std::vector<std::uint8_t>& values) {
  Selection s;
  for (std::size_t lt = 0; lt < m.select.size(); ++lt) {
    for (std::size_t p = 0; p < m.select[lt].size(); ++p) {
      if (values[static_cast<std::size_t>(m.select[lt][p])]) {
        s.nodes.push_back({m.first_frame + static_cast<std::int32_t>(lt), static_cast<std::int32_t>(p)});
      }
    }
  }
  for (std::size_t i = 0; i < m.links.size(); ++i) {
    if (values[static_cast<std::size_t>(m.link_var[i])]) {
      const auto& l = m.links[i];
      s.links.push_back({{l.frame - 1, l.source}, {l.frame, l.target}});
    }
  }
  std::sort(s.links.begin(), s.links.end());
  return s;
}

// Builds tracks from selected nodes and links. A track starts at a node with
// no predecessor or whose predecessor has two successors; labels follow
// (begin frame, first pixel of the first mask).
inline Lineage build_lineage(const Selection& sel, const CandidateSet& candidates) {
  Lineage out;
  auto& g = out.graph;
  g.nodes = sel.nodes;
  std::sort(g.nodes.begin(), g.nodes.end());
  std::map<LineageNode, std::int32_t> index;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    const std::int64_t lt = static_cast<std::int64_t>(n.frame) - candidates.first_frame;
    if (lt < 0 || lt >= static_cast<std::int64_t>(candidates.frames.size()) || n.candidate < 0 ||
        static_cast<std::size_t>(n.candidate) >= candidates.frames[static_cast<std::size_t>(lt)].segments.size()) {
      throw LineageError("selected node references an unknown candidate");
    }
    if (!index.emplace(n, static_cast<std::int32_t>(i)).second) throw LineageError("duplicate selected node");
  }
  const std::size_t n = g.nodes.size();
  std::vector<std::int32_t> pred(n, -1);
  std::vector<std::vector<std::int32_t>> succ(n);
  for (const auto& [a, b] : sel.links) {
    const auto ia = index.find(a), ib = index.find(b);
    if (ia == index.end() || ib == index.end()) throw LineageError("link touches an unselected node");
    if (b.frame != a.frame + 1) throw LineageError("link does not join consecutive frames");
    if (pred[static_cast<std::size_t>(ib->second)] >= 0) {
      throw LineageError("node at frame " + std::to_string(b.frame) + " has two predecessors");
    }
    pred[static_cast<std::size_t>(ib->second)] = ia->second;
    succ[static_cast<std::size_t>(ia->second)].push_back(ib->second);
    g.edges.emplace_back(ia->second, ib->second);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (succ[i].size() > 2) {
      throw LineageError("node at frame " + std::to_string(g.nodes[i].frame) + " has more than two successors");
    }
  }

  // Disjointness on the actual masks, painted frame by frame.
  const std::size_t T = candidates.frames.size();
  std::vector<LabelImage> frames;
  frames.reserve(T);
  for (const auto& f : candidates.frames) {
    if (f.dims.empty()) throw LineageError("candidate frame has no dims");
    frames.emplace_back(f.dims, std::uint16_t{0});
  }

  const auto seg = [&](std::size_t i) -> const CandidateSegment& {
    const auto& nd = g.nodes[i];
    return candidates.frames[static_cast<std::size_t>(nd.frame - candidates.first_frame)]
        .segments[static_cast<std::size_t>(nd.candidate)];
  };

  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t p = pred[i];
    if (p < 0 || succ[static_cast<std::size_t>(p)].size() == 2) starts.push_back(i);
  }
  std::sort(starts.begin(), starts.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(g.nodes[a].frame, seg(a).first_pixel) < std::pair(g.nodes[b].frame, seg(b).first_pixel);
  });
  if (starts.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw LineageError("more tracks than a 16-bit label image can hold");
  }
  g.track_of_node.assign(n, 0);
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const auto label = static_cast<std::uint32_t>(k + 1);
    std::size_t cur = starts[k];
    TrackRecord rec{label, static_cast<std::uint32_t>(g.nodes[cur].frame), 0, 0};
    while (true) {
      g.track_of_node[cur] = label;
      rec.end = static_cast<std::uint32_t>(g.nodes[cur].frame);
      if (succ[cur].size() != 1) break;
      cur = static_cast<std::size_t>(succ[cur][0]);
    }
    out.tracks.records.push_back(rec);
  }
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const std::int32_t p = pred[starts[k]];
    if (p >= 0) out.tracks.records[k].parent = g.track_of_node[static_cast<std::size_t>(p)];
  }

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lt = static_cast<std::size_t>(g.nodes[i].frame - candidates.first_frame);
    const auto& f = candidates.frames[lt];
    auto& img = frames[lt];
    const auto label = static_cast<std::uint16_t>(g.track_of_node[i]);
    seg(i).for_each_pixel(f.shape, [&](std::size_t px) {
      if (img[px] != 0) {
        throw LineageError("selected masks overlap at frame " + std::to_string(g.nodes[i].frame));
      }
      img[px] = label;
    });
  }
  if (!frames.empty()) out.labels = stack_frames(frames);
  return out;
}

// Validates the assignment against the model and decodes it.
inline Lineage extract_lineage(const TrackingModel& model, std::vector<std::uint8_t> values,
                               const CandidateSet& candidates) {
  if (values.size() != model.program.size()) throw LineageError("assignment size does not match the model");
  model.canonicalize(values);
  if (const auto bad = model.program.first_violation(values)) {
    throw LineageError("assignment violates constraint " + *bad);
  }
  const Selection sel = read_selection(model, values);
  Lineage out = build_lineage(sel, candidates);
  // Two successors must coincide with the division flag.
  std::vector<std::size_t> outdeg(out.graph.nodes.size(), 0);
  for (const auto& e : out.graph.edges) ++outdeg[static_cast<std::size_t>(e.first)];
  for (std::size_t i = 0; i < out.graph.nodes.size(); ++i) {
    const auto& nd = out.graph.nodes[i];
    const auto lt = static_cast<std::size_t>(nd.frame - model.first_frame);
    const bool divides = values[static_cast<std::size_t>(model.divide[lt][static_cast<std::size_t>(nd.candidate)])];
    if ((outdeg[i] == 2) != divides) {
      throw LineageError("division flag disagrees with successor count at frame " + std::to_string(nd.frame));
    }
  }
  return out;
}

}  // namespace ucmtrack
