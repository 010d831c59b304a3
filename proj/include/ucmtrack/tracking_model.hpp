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

// Binary programs for joint segment selection and tracking, and for
// selecting the hierarchy nodes that best match a ground truth.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ucmtrack/binary_program.hpp"
#include "ucmtrack/hierarchy.hpp"
#include "ucmtrack/linking.hpp"

namespace ucmtrack {

struct Penalties {
  double appear = 0;
  double disappear = 0;
  double divide = 0;

  void validate() const {
    if (appear > 0 || disappear > 0 || divide > 0) {
      throw std::invalid_argument("penalties must be <= 0");
    }
  }
};

// Fixes the variable called `var` to `value`.
struct Pin {
  std::string var;
  std::uint8_t value = 0;
};

inline std::string select_name(std::int32_t t, std::int32_t p) {
  return "y_" + std::to_string(t) + "_" + std::to_string(p);
}
inline std::string link_name(std::int32_t t, std::int32_t p, std::int32_t q) {
  return "x_" + std::to_string(t) + "_" + std::to_string(p) + "_" + std::to_string(q);
}

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Variable layout of a tracking program. Per-candidate vectors are indexed
// [local frame][candidate]; frame numbers in names are absolute.
struct TrackingModel {
  BinaryProgram program;
  std::int32_t first_frame = 0;
  std::vector<std::vector<std::int32_t>> select, appear, disappear, divide;
  std::vector<LinkCandidate> links;
  std::vector<std::int32_t> link_var;
  std::unordered_map<std::string, std::int32_t> by_name;

  std::size_t frame_count() const { return select.size(); }

  std::optional<std::int32_t> find(const std::string& name) const {
    const auto it = by_name.find(name);
    if (it == by_name.end()) return std::nullopt;
    return it->second;
  }

  // Rewrites division+disappearance on one node into plain continuation.
  // Feasibility is kept and the objective never decreases, so afterwards a
  // node has two successors exactly when its division variable is set.
  void canonicalize(std::vector<std::uint8_t>& values) const {
    for (std::size_t t = 0; t < divide.size(); ++t) {
      for (std::size_t p = 0; p < divide[t].size(); ++p) {
        auto& d = values[static_cast<std::size_t>(divide[t][p])];
        auto& b = values[static_cast<std::size_t>(disappear[t][p])];
        if (d && b) d = b = 0;
      }
    }
  }
};

inline TrackingModel build_tracking_model(const CandidateSet& candidates,
                                          std::span<const LinkCandidate> links,
                                          const Penalties& penalties,
                                          std::span<const Pin> pins = {}) {
  penalties.validate();
  TrackingModel m;
  BinaryProgram& bp = m.program;
  m.first_frame = candidates.first_frame;
  const std::size_t T = candidates.frames.size();
  auto add = [&](std::string name, double c) {
    const std::int32_t v = bp.add_variable(name, c);
    m.by_name.emplace(std::move(name), v);
    return v;
  };
  m.select.resize(T);
  m.appear.resize(T);
  m.disappear.resize(T);
  m.divide.resize(T);
  for (std::size_t lt = 0; lt < T; ++lt) {
    const auto t = static_cast<std::int32_t>(lt) + m.first_frame;
    const std::size_t n = candidates.frames[lt].segments.size();
    for (std::size_t p = 0; p < n; ++p) {
      const auto pi = static_cast<std::int32_t>(p);
      const std::string suffix = "_" + std::to_string(t) + "_" + std::to_string(p);
      m.select[lt].push_back(add(select_name(t, pi), 0.0));
      m.appear[lt].push_back(add("a" + suffix, lt == 0 ? 0.0 : penalties.appear));
      m.disappear[lt].push_back(add("b" + suffix, lt + 1 == T ? 0.0 : penalties.disappear));
      m.divide[lt].push_back(add("d" + suffix, penalties.divide));
    }
  }

  std::vector<std::vector<std::vector<Term>>> incoming(T), outgoing(T);
  for (std::size_t lt = 0; lt < T; ++lt) {
    incoming[lt].resize(candidates.frames[lt].segments.size());
    outgoing[lt].resize(candidates.frames[lt].segments.size());
  }
  for (const auto& l : links) {
    const std::int64_t lt = static_cast<std::int64_t>(l.frame) - m.first_frame;
    if (lt < 1 || lt >= static_cast<std::int64_t>(T) || l.source < 0 || l.target < 0 ||
        static_cast<std::size_t>(l.source) >= incoming[static_cast<std::size_t>(lt) - 1].size() ||
        static_cast<std::size_t>(l.target) >= incoming[static_cast<std::size_t>(lt)].size()) {
      throw ModelError("link " + link_name(l.frame, l.source, l.target) +
                       " references an unknown candidate");
    }
    if (!(l.weight >= 0)) throw ModelError("link weights must be >= 0");
    const std::int32_t v = add(link_name(l.frame, l.source, l.target), l.weight);
    m.links.push_back(l);
    m.link_var.push_back(v);
    incoming[static_cast<std::size_t>(lt)][static_cast<std::size_t>(l.target)].push_back({v, -1});
    outgoing[static_cast<std::size_t>(lt) - 1][static_cast<std::size_t>(l.source)].push_back({v, -1});
  }

  for (std::size_t lt = 0; lt < T; ++lt) {
    const auto t = static_cast<std::int32_t>(lt) + m.first_frame;
    for (std::size_t p = 0; p < m.select[lt].size(); ++p) {
      const std::string suffix = "_" + std::to_string(t) + "_" + std::to_string(p);
      const std::int32_t y = m.select[lt][p];
      std::vector<Term> in{{y, 1}, {m.appear[lt][p], -1}};
      in.insert(in.end(), incoming[lt][p].begin(), incoming[lt][p].end());
      bp.add_row("in" + suffix, std::move(in), Sense::eq, 0);
      std::vector<Term> out{{y, 1}, {m.divide[lt][p], 1}, {m.disappear[lt][p], -1}};
      out.insert(out.end(), outgoing[lt][p].begin(), outgoing[lt][p].end());
      bp.add_row("out" + suffix, std::move(out), Sense::eq, 0);
      bp.add_row("div" + suffix, {{y, 1}, {m.divide[lt][p], -1}}, Sense::ge, 0);
    }
    for (auto [a, b] : candidates.frames[lt].exclusions) {
      bp.add_row("ex_" + std::to_string(t) + "_" + std::to_string(a) + "_" + std::to_string(b),
                 {{m.select[lt][static_cast<std::size_t>(a)], 1}, {m.select[lt][static_cast<std::size_t>(b)], 1}},
                 Sense::le, 1);
    }
  }

  // Pins.
  std::unordered_map<std::int32_t, std::uint8_t> pinned;
  for (const auto& pin : pins) {
    const auto v = m.find(pin.var);
    if (!v) throw ModelError("pin references unknown variable " + pin.var);
    if (pin.value > 1) throw ModelError("pin value for " + pin.var + " must be 0 or 1");
    const auto [it, fresh] = pinned.emplace(*v, pin.value);
    if (!fresh && it->second != pin.value) throw ModelError("conflicting pins on " + pin.var);
    if (fresh) bp.add_row("pin_" + pin.var, {{*v, 1}}, Sense::eq, pin.value);
  }
  for (std::size_t lt = 0; lt < T; ++lt) {
    for (auto [a, b] : candidates.frames[lt].exclusions) {
      const auto ya = pinned.find(m.select[lt][static_cast<std::size_t>(a)]);
      const auto yb = pinned.find(m.select[lt][static_cast<std::size_t>(b)]);
      if (ya != pinned.end() && yb != pinned.end() && ya->second && yb->second) {
        throw ModelError("pins select both " + bp.variables[static_cast<std::size_t>(ya->first)].name +
                         " and " + bp.variables[static_cast<std::size_t>(yb->first)].name +
                         ", which exclude each other");
      }
    }
  }

  // Bounding structure: each selected candidate receives at most one link
  // and sends at most two; candidates nested within a frame are mutually
  // exclusive. The links into frame t are covered once by their targets and
  // once by their sources.
  std::vector<std::size_t> offset(T + 1, 0);
  for (std::size_t lt = 0; lt < T; ++lt) offset[lt + 1] = offset[lt] + m.select[lt].size();
  const std::size_t nodes = offset[T];
  bp.groups.resize(2 * nodes);
  bp.groups_laminar = true;
  for (std::size_t lt = 0; lt < T; ++lt) {
    for (std::size_t q = 0; q < m.select[lt].size(); ++q) {
      auto& in = bp.groups[offset[lt] + q];
      auto& out = bp.groups[nodes + offset[lt] + q];
      in.selector = out.selector = m.select[lt][q];
      in.stage = static_cast<std::int32_t>(lt);
      out.stage = static_cast<std::int32_t>(lt + 1);
      out.cover = 1;
      out.capacity = 2;
      for (const auto& term : incoming[lt][q]) {
        if (bp.variables[static_cast<std::size_t>(term.var)].objective > 0) in.members.push_back(term.var);
      }
      for (const auto& term : outgoing[lt][q]) {
        if (bp.variables[static_cast<std::size_t>(term.var)].objective > 0) out.members.push_back(term.var);
      }
    }
    const auto parents = laminar_parents(m.select[lt].size(), candidates.frames[lt].exclusions);
    if (!parents) {
      bp.groups_laminar = false;
      continue;
    }
    for (std::size_t q = 0; q < parents->size(); ++q) {
      const std::int32_t p = (*parents)[q];
      bp.groups[offset[lt] + q].parent = p < 0 ? -1 : static_cast<std::int32_t>(offset[lt]) + p;
      bp.groups[nodes + offset[lt] + q].parent = p < 0 ? -1 : static_cast<std::int32_t>(nodes + offset[lt]) + p;
    }
  }
  if (!bp.groups_laminar) {
    for (auto& g : bp.groups) g.parent = -1;
  }
  return m;
}

// Assignment of hierarchy nodes to ground-truth instances maximizing the
// total IoU; selected nodes are pairwise disjoint.
struct GtSelectionModel {
  BinaryProgram program;
  std::vector<std::int32_t> select;  // per hierarchy node
  struct Assignment {
    std::int32_t node, gt, var;
    double iou;
  };
  std::vector<Assignment> assignments;

  std::vector<std::int32_t> selected(std::span<const std::uint8_t> values) const {
    std::vector<std::int32_t> out;
    for (std::size_t p = 0; p < select.size(); ++p) {
      if (values[static_cast<std::size_t>(select[p])]) out.push_back(static_cast<std::int32_t>(p));
    }
    return out;
  }
};

inline GtSelectionModel build_gt_selection_model(const FrameCandidates& hierarchy,
                                                 std::span<const CandidateSegment> gt) {
  GtSelectionModel m;
  BinaryProgram& bp = m.program;
  const std::size_t n = hierarchy.segments.size();
  for (std::size_t p = 0; p < n; ++p) {
    m.select.push_back(bp.add_variable("y_" + std::to_string(p), 0.0));
  }
  std::vector<std::vector<Term>> per_node(n), per_gt(gt.size());
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < gt.size(); ++q) {
      const double iou = compute_iou(hierarchy.segments[p], gt[q]);
      if (iou <= 0) continue;
      const std::int32_t v = bp.add_variable("x_" + std::to_string(p) + "_" + std::to_string(q), iou);
      m.assignments.push_back({static_cast<std::int32_t>(p), static_cast<std::int32_t>(q), v, iou});
      per_node[p].push_back({v, -1});
      per_gt[q].push_back({v, 1});
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    std::vector<Term> row{{m.select[p], 1}};
    row.insert(row.end(), per_node[p].begin(), per_node[p].end());
    bp.add_row("node_" + std::to_string(p), std::move(row), Sense::ge, 0);
  }
  for (std::size_t q = 0; q < gt.size(); ++q) {
    if (!per_gt[q].empty()) bp.add_row("gt_" + std::to_string(q), per_gt[q], Sense::le, 1);
  }
  for (auto [a, b] : hierarchy.exclusions) {
    bp.add_row("ex_" + std::to_string(a) + "_" + std::to_string(b),
               {{m.select[static_cast<std::size_t>(a)], 1}, {m.select[static_cast<std::size_t>(b)], 1}},
               Sense::le, 1);
  }
  bp.groups.resize(n);
  const auto parents = laminar_parents(n, hierarchy.exclusions);
  bp.groups_laminar = parents.has_value();
  for (std::size_t p = 0; p < n; ++p) {
    bp.groups[p].selector = m.select[p];
    for (const auto& t : per_node[p]) bp.groups[p].members.push_back(t.var);
    if (parents) bp.groups[p].parent = (*parents)[p];
  }
  return m;
}

}  // namespace ucmtrack
