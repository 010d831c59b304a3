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

// Sparse IoU association weights between candidates of adjacent frames.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ucmtrack/hierarchy.hpp"

namespace ucmtrack {

// |A ∩ B| / |A ∪ B|. Disjoint bounding boxes return 0 without reading either
// mask; otherwise only the box intersection is scanned.
inline double compute_iou(const CandidateSegment& a, const CandidateSegment& b) {
  const BoundingBox inter = BoundingBox::intersect(a.box, b.box);
  if (inter.empty()) return 0.0;
  if (a.mask.size() != a.box.volume() || b.mask.size() != b.box.volume()) {
    throw std::invalid_argument("compute_iou: mask does not match its bounding box");
  }
  std::size_t common = 0;
  for (std::size_t z = inter.lo[0]; z < inter.hi[0]; ++z) {
    for (std::size_t y = inter.lo[1]; y < inter.hi[1]; ++y) {
      const std::size_t ra = ((z - a.box.lo[0]) * a.box.extent(1) + (y - a.box.lo[1])) * a.box.extent(2);
      const std::size_t rb = ((z - b.box.lo[0]) * b.box.extent(1) + (y - b.box.lo[1])) * b.box.extent(2);
      for (std::size_t x = inter.lo[2]; x < inter.hi[2]; ++x) {
        common += a.mask[ra + x - a.box.lo[2]] & b.mask[rb + x - b.box.lo[2]];
      }
    }
  }
  if (common == 0) return 0.0;
  return static_cast<double>(common) / static_cast<double>(a.area + b.area - common);
}

struct LinkConfig {
  std::size_t k = 3;
  double radius = 20.0;
  std::array<double, 3> axis_scale{1.0, 1.0, 1.0};  // (z, y, x)
  double power = 1.0;

  void validate() const {
    if (k < 1) throw std::invalid_argument("link config: k must be >= 1");
    if (!(radius > 0)) throw std::invalid_argument("link config: radius must be > 0");
    if (!(power >= 1)) throw std::invalid_argument("link config: power must be >= 1");
    for (double s : axis_scale) {
      if (!(s > 0)) throw std::invalid_argument("link config: axis scales must be > 0");
    }
  }
};

// Association between candidate `source` of frame `frame - 1` and candidate
// `target` of frame `frame`. `weight` is iou^power.
struct LinkCandidate {
  std::int32_t frame = 0;
  std::int32_t source = 0;
  std::int32_t target = 0;
  double weight = 0;
  double iou = 0;

  friend bool operator==(const LinkCandidate&, const LinkCandidate&) = default;
};

using Point3 = std::array<double, 3>;

inline double squared_distance(const Point3& a, const Point3& b) {
  double s = 0;
  for (std::size_t i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Static 3-d tree over a point set for bounded k-nearest queries. Results
// are ordered by distance, ties by point index.
class KdTree {
 public:
  explicit KdTree(std::vector<Point3> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    nodes_.reserve(points_.size());
    if (!points_.empty()) build(0, order_.size(), 0);
  }

  std::size_t size() const { return points_.size(); }

  // Up to `count` nearest points within `radius` of `query`, as
  // (squared distance, index) pairs.
  std::vector<std::pair<double, std::uint32_t>> nearest(const Point3& query, std::size_t count,
                                                        double radius) const {
    Heap heap;
    if (!nodes_.empty() && count > 0) search(0, query, count, radius * radius, heap);
    std::vector<std::pair<double, std::uint32_t>> out;
    out.reserve(heap.size());
    while (!heap.empty()) {
      out.push_back(heap.top());
      heap.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  struct Node {
    std::uint32_t point;
    std::uint8_t axis;
    std::int32_t left = -1, right = -1;
  };
  using Heap = std::priority_queue<std::pair<double, std::uint32_t>>;

  std::int32_t build(std::size_t lo, std::size_t hi, std::size_t depth) {
    if (lo >= hi) return -1;
    const auto axis = static_cast<std::uint8_t>(depth % 3);
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(lo),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return std::pair(points_[a][axis], a) < std::pair(points_[b][axis], b);
                     });
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({order_[mid], axis});
    const std::int32_t l = build(lo, mid, depth + 1);
    const std::int32_t r = build(mid + 1, hi, depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = l;
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  void search(std::int32_t id, const Point3& q, std::size_t count, double r2, Heap& heap) const {
    if (id < 0) return;
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    const Point3& p = points_[node.point];
    const double d2 = squared_distance(p, q);
    if (d2 <= r2) {
      const std::pair<double, std::uint32_t> cand{d2, node.point};
      if (heap.size() < count) heap.push(cand);
      else if (cand < heap.top()) {
        heap.pop();
        heap.push(cand);
      }
    }
    const double diff = q[node.axis] - p[node.axis];
    const std::int32_t near = diff < 0 ? node.left : node.right;
    const std::int32_t far = diff < 0 ? node.right : node.left;
    search(near, q, count, r2, heap);
    const double bound = heap.size() < count ? r2 : std::min(r2, heap.top().first);
    if (diff * diff <= bound) search(far, q, count, r2, heap);
  }

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

inline Point3 scaled_centroid(const CandidateSegment& s, const std::array<double, 3>& scale) {
  return {s.centroid[0] * scale[0], s.centroid[1] * scale[1], s.centroid[2] * scale[2]};
}

// For each candidate of `cur`, the 2k nearest candidates of `prev` within the
// radius are scored by IoU and the k best with IoU > 0 are kept (ties: closer
// centroid, then smaller index).
inline std::vector<LinkCandidate> candidate_links(const FrameCandidates& prev,
                                                  const FrameCandidates& cur,
                                                  const LinkConfig& cfg) {
  cfg.validate();
  std::vector<LinkCandidate> links;
  if (prev.segments.empty() || cur.segments.empty()) return links;
  std::vector<Point3> pts;
  pts.reserve(prev.segments.size());
  for (const auto& s : prev.segments) pts.push_back(scaled_centroid(s, cfg.axis_scale));
  const KdTree tree(std::move(pts));

  struct Scored {
    double iou, dist2;
    std::uint32_t source;
  };
  std::vector<Scored> scored;
  for (std::size_t q = 0; q < cur.segments.size(); ++q) {
    const auto& target = cur.segments[q];
    scored.clear();
    for (auto [d2, p] : tree.nearest(scaled_centroid(target, cfg.axis_scale), 2 * cfg.k, cfg.radius)) {
      const double iou = compute_iou(prev.segments[p], target);
      if (iou > 0) scored.push_back({iou, d2, p});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
      if (a.iou != b.iou) return a.iou > b.iou;
      if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
      return a.source < b.source;
    });
    if (scored.size() > cfg.k) scored.resize(cfg.k);
    std::sort(scored.begin(), scored.end(),
              [](const Scored& a, const Scored& b) { return a.source < b.source; });
    for (const auto& s : scored) {
      links.push_back({cur.frame, static_cast<std::int32_t>(s.source), static_cast<std::int32_t>(q),
                       std::pow(s.iou, cfg.power), s.iou});
    }
  }
  return links;
}

// Debug dump: "<t> <source> <target> <w>" per line.
inline void write_link_table(std::ostream& out, const std::vector<LinkCandidate>& links) {
  for (const auto& l : links) {
    out << l.frame << ' ' << l.source << ' ' << l.target << ' ' << l.weight << '\n';
  }
}

}  // namespace ucmtrack
