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

// Per-frame watershed hierarchies by area and candidate segment extraction.
//
// Each foreground component is turned into a face-connected pixel graph
// whose edge weights are the mean contour value of the two endpoints. The
// hierarchy is built from the minimum spanning tree: every MST merge between
// two regions holding distinct minima is re-weighted by the area extinction
// value of the losing minimum, and the re-weighted MST is clustered again to
// obtain the dendrogram. Leaves are the watershed basins.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ucmtrack/tensor.hpp"

namespace ucmtrack {

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Returns the surviving root.
  std::size_t unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return a;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
};

}  // namespace detail

// Face-connected components in raster order of their first pixel. Each
// entry lists the component's pixels in ascending linear index.
inline std::vector<std::vector<std::size_t>> component_pixels(const ForegroundMask& mask) {
  const Shape shape = Shape::of(mask.dims());
  std::vector<std::int32_t> seen(mask.size(), 0);
  std::vector<std::vector<std::size_t>> comps;
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i] || seen[i]) continue;
    auto& pixels = comps.emplace_back();
    seen[i] = 1;
    stack.push_back(i);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      pixels.push_back(p);
      shape.for_each_neighbor(p, [&](std::size_t q) {
        if (mask[q] && !seen[q]) {
          seen[q] = 1;
          stack.push_back(q);
        }
      });
    }
    std::sort(pixels.begin(), pixels.end());
  }
  return comps;
}

inline LabelImage connected_components(const ForegroundMask& mask) {
  const auto comps = component_pixels(mask);
  if (comps.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw std::overflow_error("connected_components: more than 65535 components");
  }
  LabelImage labels(mask.dims(), 0);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (std::size_t p : comps[c]) labels[p] = static_cast<std::uint16_t>(c + 1);
  }
  return labels;
}

struct PixelGraph {
  std::vector<std::size_t> vertices;  // linear pixel indices, ascending
  std::vector<float> vertex_values;   // contour value per vertex
  std::vector<std::array<std::uint32_t, 2>> edges;
  std::vector<float> weights;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t edge_count() const { return edges.size(); }
};

// `pixels` must be ascending and form one face-connected component.
inline PixelGraph build_pixel_graph(std::vector<std::size_t> pixels, const Shape& shape,
                                    const ContourMap& contour) {
  PixelGraph g;
  g.vertices = std::move(pixels);
  g.vertex_values.reserve(g.vertices.size());
  for (std::size_t p : g.vertices) g.vertex_values.push_back(contour[p]);
  const auto local = [&](std::size_t p) -> std::int64_t {
    auto it = std::lower_bound(g.vertices.begin(), g.vertices.end(), p);
    return (it != g.vertices.end() && *it == p) ? it - g.vertices.begin() : -1;
  };
  for (std::size_t u = 0; u < g.vertices.size(); ++u) {
    shape.for_each_forward_neighbor(g.vertices[u], [&](std::size_t q) {
      const std::int64_t v = local(q);
      if (v < 0) return;
      g.edges.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)});
      g.weights.push_back(static_cast<float>(
          (static_cast<double>(contour[g.vertices[u]]) + contour[q]) / 2.0));
    });
  }
  return g;
}

// Binary dendrogram over one component. Nodes [0, leaf_count) are the
// watershed basins; internal nodes follow in merge order, so a parent always
// has a larger index than its children.
struct RegionDendrogram {
  std::size_t leaf_count = 0;
  std::vector<std::int32_t> parent;                // -1 at the root
  std::vector<std::array<std::int32_t, 2>> children;  // {-1,-1} for leaves
  std::vector<double> altitude;                    // 0 for leaves
  std::vector<std::size_t> area;
  std::vector<std::uint32_t> basin_of_vertex;
  std::vector<std::uint32_t> merge_edge;           // graph edge creating each internal node

  std::size_t size() const { return parent.size(); }
  std::size_t root() const { return parent.size() - 1; }
  bool is_leaf(std::size_t n) const { return n < leaf_count; }

  std::size_t lca(std::size_t a, std::size_t b) const {
    // Parents have larger indices, so always lift the smaller node.
    while (a != b) {
      if (a < b) a = static_cast<std::size_t>(parent[a]);
      else b = static_cast<std::size_t>(parent[b]);
    }
    return a;
  }
};

namespace detail {

// Regional minima of the vertex values: plateaus with no strictly lower
// neighbor. Ids follow the plateau's lowest vertex index.
inline std::vector<std::int32_t> regional_minima(const PixelGraph& g) {
  const std::size_t n = g.vertex_count();
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (const auto& e : g.edges) {
    adj[e[0]].push_back(e[1]);
    adj[e[1]].push_back(e[0]);
  }
  std::vector<std::int32_t> id(n, -2);  // -2 unvisited, -1 not a minimum
  std::int32_t next = 0;
  std::vector<std::uint32_t> plateau, stack;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (id[s] != -2) continue;
    plateau.clear();
    stack.assign(1, s);
    id[s] = -1;
    bool minimum = true;
    const float level = g.vertex_values[s];
    while (!stack.empty()) {
      const std::uint32_t u = stack.back();
      stack.pop_back();
      plateau.push_back(u);
      for (std::uint32_t v : adj[u]) {
        if (g.vertex_values[v] < level) minimum = false;
        if (g.vertex_values[v] == level && id[v] == -2) {
          id[v] = -1;
          stack.push_back(v);
        }
      }
    }
    if (minimum) {
      for (std::uint32_t u : plateau) id[u] = next;
      ++next;
    }
  }
  return id;
}

inline std::vector<std::uint32_t> sorted_edge_order(const std::vector<double>& weights) {
  std::vector<std::uint32_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return weights[a] < weights[b]; });
  return order;
}

}  // namespace detail

inline RegionDendrogram watershed_by_area(const PixelGraph& g) {
  const std::size_t n = g.vertex_count();
  if (n == 0) throw std::invalid_argument("watershed_by_area: empty graph");

  // Kruskal on the contour-weighted graph, tracking the dominant minimum and
  // area of each region. A merge of two regions with distinct minima
  // extinguishes the smaller one (ties: the higher minimum id loses); the MST
  // edge takes the loser's area as its new weight, absorption merges get 0.
  const auto minima = detail::regional_minima(g);
  std::vector<double> w(g.weights.begin(), g.weights.end());
  const auto order = detail::sorted_edge_order(w);
  detail::DisjointSets sets(n);
  std::vector<std::int32_t> region_min(minima.begin(), minima.end());
  std::vector<std::size_t> region_area(n, 1);
  std::vector<std::uint32_t> mst;
  std::vector<double> mst_altitude;
  for (std::uint32_t e : order) {
    const std::size_t a = sets.find(g.edges[e][0]);
    const std::size_t b = sets.find(g.edges[e][1]);
    if (a == b) continue;
    const std::int32_t ma = region_min[a], mb = region_min[b];
    double alt = 0;
    std::int32_t survivor_min = ma >= 0 ? ma : mb;
    if (ma >= 0 && mb >= 0 && ma != mb) {
      const bool a_loses = region_area[a] < region_area[b] ||
                           (region_area[a] == region_area[b] && ma > mb);
      alt = static_cast<double>(a_loses ? region_area[a] : region_area[b]);
      survivor_min = a_loses ? mb : ma;
    }
    const std::size_t r = sets.unite(a, b);
    region_min[r] = survivor_min;
    region_area[r] = region_area[a] + region_area[b];
    mst.push_back(e);
    mst_altitude.push_back(alt);
    if (mst.size() + 1 == n) break;
  }
  if (mst.size() + 1 != n) throw std::invalid_argument("watershed_by_area: graph is not connected");

  // Basins: components of the zero-altitude MST edges.
  detail::DisjointSets basins(n);
  for (std::size_t i = 0; i < mst.size(); ++i) {
    if (mst_altitude[i] == 0) basins.unite(g.edges[mst[i]][0], g.edges[mst[i]][1]);
  }
  RegionDendrogram d;
  d.basin_of_vertex.assign(n, 0);
  std::vector<std::int64_t> basin_id(n, -1);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t r = basins.find(v);
    if (basin_id[r] < 0) basin_id[r] = static_cast<std::int64_t>(d.leaf_count++);
    d.basin_of_vertex[v] = static_cast<std::uint32_t>(basin_id[r]);
  }
  const std::size_t total = 2 * d.leaf_count - 1;
  d.parent.assign(total, -1);
  d.children.assign(total, {-1, -1});
  d.altitude.assign(total, 0.0);
  d.area.assign(total, 0);
  d.merge_edge.assign(total, 0);
  for (std::size_t v = 0; v < n; ++v) ++d.area[d.basin_of_vertex[v]];

  // Second clustering over the re-weighted MST, ties by graph edge index.
  std::vector<std::uint32_t> upper;
  for (std::size_t i = 0; i < mst.size(); ++i) {
    if (mst_altitude[i] > 0) upper.push_back(static_cast<std::uint32_t>(i));
  }
  std::stable_sort(upper.begin(), upper.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (mst_altitude[a] != mst_altitude[b]) return mst_altitude[a] < mst_altitude[b];
    return mst[a] < mst[b];
  });
  detail::DisjointSets tree(d.leaf_count);
  std::vector<std::size_t> node_of_set(d.leaf_count);
  std::iota(node_of_set.begin(), node_of_set.end(), std::size_t{0});
  std::size_t next = d.leaf_count;
  for (std::uint32_t i : upper) {
    const auto& e = g.edges[mst[i]];
    const std::size_t a = tree.find(d.basin_of_vertex[e[0]]);
    const std::size_t b = tree.find(d.basin_of_vertex[e[1]]);
    const std::size_t na = node_of_set[a], nb = node_of_set[b];
    d.children[next] = {static_cast<std::int32_t>(std::min(na, nb)),
                        static_cast<std::int32_t>(std::max(na, nb))};
    d.parent[na] = d.parent[nb] = static_cast<std::int32_t>(next);
    d.altitude[next] = mst_altitude[i];
    d.area[next] = d.area[na] + d.area[nb];
    d.merge_edge[next] = mst[i];
    node_of_set[tree.unite(a, b)] = next;
    ++next;
  }
  return d;
}

// Mean weight of the graph edges whose endpoints first meet at each node,
// i.e. the frontier between the node's children. 0 for leaves.
inline std::vector<double> frontier_strength(const RegionDendrogram& d, const PixelGraph& g) {
  std::vector<double> sum(d.size(), 0.0);
  std::vector<std::size_t> count(d.size(), 0);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const std::size_t a = d.basin_of_vertex[g.edges[e][0]];
    const std::size_t b = d.basin_of_vertex[g.edges[e][1]];
    if (a == b) continue;
    const std::size_t n = d.lca(a, b);
    sum[n] += g.weights[e];
    ++count[n];
  }
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (count[n]) sum[n] /= static_cast<double>(count[n]);
  }
  return sum;
}

struct BoundingBox {
  std::array<std::size_t, 3> lo{0, 0, 0};
  std::array<std::size_t, 3> hi{0, 0, 0};  // exclusive

  std::size_t extent(std::size_t axis) const { return hi[axis] - lo[axis]; }
  std::size_t volume() const { return extent(0) * extent(1) * extent(2); }
  bool empty() const { return lo[0] >= hi[0] || lo[1] >= hi[1] || lo[2] >= hi[2]; }

  static BoundingBox intersect(const BoundingBox& a, const BoundingBox& b) {
    BoundingBox r;
    for (std::size_t i = 0; i < 3; ++i) {
      r.lo[i] = std::max(a.lo[i], b.lo[i]);
      r.hi[i] = std::max(r.lo[i], std::min(a.hi[i], b.hi[i]));
    }
    return r;
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// One segmentation hypothesis. The mask is cropped to the bounding box, one
// byte per voxel, row-major over the box.
struct CandidateSegment {
  std::int32_t frame = 0;
  std::int32_t component = 0;
  std::int32_t node = 0;
  BoundingBox box;
  std::vector<std::uint8_t> mask;
  std::array<double, 3> centroid{0, 0, 0};  // (z, y, x)
  std::size_t area = 0;
  double frontier = 0;  // mean contour strength between its children
  std::size_t first_pixel = 0;

  bool contains(std::size_t z, std::size_t y, std::size_t x) const {
    if (z < box.lo[0] || z >= box.hi[0] || y < box.lo[1] || y >= box.hi[1] ||
        x < box.lo[2] || x >= box.hi[2]) {
      return false;
    }
    return mask[((z - box.lo[0]) * box.extent(1) + (y - box.lo[1])) * box.extent(2) +
                (x - box.lo[2])] != 0;
  }

  template <typename Fn>
  void for_each_pixel(const Shape& shape, Fn&& fn) const {
    std::size_t k = 0;
    for (std::size_t z = box.lo[0]; z < box.hi[0]; ++z)
      for (std::size_t y = box.lo[1]; y < box.hi[1]; ++y)
        for (std::size_t x = box.lo[2]; x < box.hi[2]; ++x, ++k)
          if (mask[k]) fn(shape.index(z, y, x));
  }

  static CandidateSegment from_pixels(std::span<const std::size_t> pixels, const Shape& shape) {
    if (pixels.empty()) throw std::invalid_argument("segment: empty pixel set");
    CandidateSegment s;
    s.box.lo = {std::numeric_limits<std::size_t>::max(), std::numeric_limits<std::size_t>::max(),
                std::numeric_limits<std::size_t>::max()};
    s.first_pixel = std::numeric_limits<std::size_t>::max();
    std::array<double, 3> sum{0, 0, 0};
    for (std::size_t p : pixels) {
      const auto c = shape.coords(p);
      for (std::size_t i = 0; i < 3; ++i) {
        s.box.lo[i] = std::min(s.box.lo[i], c[i]);
        s.box.hi[i] = std::max(s.box.hi[i], c[i] + 1);
        sum[i] += static_cast<double>(c[i]);
      }
      s.first_pixel = std::min(s.first_pixel, p);
    }
    s.mask.assign(s.box.volume(), 0);
    for (std::size_t p : pixels) {
      const auto c = shape.coords(p);
      s.mask[((c[0] - s.box.lo[0]) * s.box.extent(1) + (c[1] - s.box.lo[1])) * s.box.extent(2) +
             (c[2] - s.box.lo[2])] = 1;
    }
    s.area = pixels.size();
    for (std::size_t i = 0; i < 3; ++i) s.centroid[i] = sum[i] / static_cast<double>(s.area);
    return s;
  }
};

// Candidates of one frame; `exclusions` holds every (descendant, ancestor)
// index pair, so at most one member of each pair may be selected.
struct FrameCandidates {
  std::int32_t frame = 0;
  std::vector<std::size_t> dims;  // spatial dims of the frame
  Shape shape;
  std::vector<CandidateSegment> segments;
  std::vector<std::pair<std::int32_t, std::int32_t>> exclusions;
  std::size_t emptied_components = 0;  // components removed entirely by filtering
};

struct CandidateSet {
  std::int32_t first_frame = 0;
  std::vector<FrameCandidates> frames;

  std::size_t frame_count() const { return frames.size(); }
  std::size_t candidate_count() const {
    std::size_t n = 0;
    for (const auto& f : frames) n += f.segments.size();
    return n;
  }
};

struct FilterParams {
  std::size_t min_size = 1;
  std::size_t max_size = std::numeric_limits<std::size_t>::max();
  double strength_threshold = 0.0;
};

// Surviving dendrogram nodes after size and frontier-strength filtering,
// in ascending node order.
inline std::vector<std::size_t> filter_nodes(const RegionDendrogram& d,
                                             const std::vector<double>& frontier,
                                             const FilterParams& params) {
  std::vector<char> alive(d.size(), 0);
  for (std::size_t n = 0; n < d.size(); ++n) {
    alive[n] = d.area[n] >= params.min_size && d.area[n] <= params.max_size;
  }
  const auto surviving_parent = [&](std::size_t n) -> std::int64_t {
    std::int64_t p = d.parent[n];
    while (p >= 0 && !alive[static_cast<std::size_t>(p)]) p = d.parent[static_cast<std::size_t>(p)];
    return p;
  };
  // A node whose surviving parent has a weak frontier is fused into it.
  std::vector<char> weak_child(d.size(), 0);
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (!alive[n]) continue;
    const std::int64_t p = surviving_parent(n);
    if (p >= 0 && frontier[static_cast<std::size_t>(p)] < params.strength_threshold) weak_child[n] = 1;
  }
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (alive[n] && !weak_child[n]) out.push_back(n);
  }
  return out;
}

struct ComponentCandidates {
  std::vector<CandidateSegment> segments;
  std::vector<std::pair<std::int32_t, std::int32_t>> exclusions;  // local indices
};

inline ComponentCandidates filter_and_extract(const RegionDendrogram& d, const PixelGraph& g,
                                              const Shape& shape, const FilterParams& params) {
  if (params.min_size > params.max_size) {
    throw std::invalid_argument("filter_and_extract: min_size exceeds max_size");
  }
  if (params.strength_threshold < 0 || params.strength_threshold > 1) {
    throw std::invalid_argument("filter_and_extract: strength threshold outside [0, 1]");
  }
  const auto frontier = frontier_strength(d, g);
  const auto nodes = filter_nodes(d, frontier, params);

  std::vector<std::vector<std::size_t>> basin_pixels(d.leaf_count);
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    basin_pixels[d.basin_of_vertex[v]].push_back(g.vertices[v]);
  }
  std::vector<std::int64_t> cand_of_node(d.size(), -1);
  ComponentCandidates out;
  std::vector<std::size_t> pixels, stack;
  for (std::size_t n : nodes) {
    pixels.clear();
    stack.assign(1, n);
    while (!stack.empty()) {
      const std::size_t m = stack.back();
      stack.pop_back();
      if (d.is_leaf(m)) {
        pixels.insert(pixels.end(), basin_pixels[m].begin(), basin_pixels[m].end());
      } else {
        stack.push_back(static_cast<std::size_t>(d.children[m][0]));
        stack.push_back(static_cast<std::size_t>(d.children[m][1]));
      }
    }
    auto seg = CandidateSegment::from_pixels(pixels, shape);
    seg.node = static_cast<std::int32_t>(n);
    seg.frontier = frontier[n];
    cand_of_node[n] = static_cast<std::int64_t>(out.segments.size());
    out.segments.push_back(std::move(seg));
  }
  // Walk each survivor up to its last ancestor.
  for (std::size_t n : nodes) {
    for (std::int64_t p = d.parent[n]; p >= 0; p = d.parent[static_cast<std::size_t>(p)]) {
      if (cand_of_node[static_cast<std::size_t>(p)] >= 0) {
        out.exclusions.emplace_back(static_cast<std::int32_t>(cand_of_node[n]),
                                    static_cast<std::int32_t>(cand_of_node[static_cast<std::size_t>(p)]));
      }
    }
  }
  return out;
}

// Writes, for every pixel, the highest merge altitude among its face
// neighbors' basins (an ultrametric contour raster of the frame).
inline void paint_ucm(const RegionDendrogram& d, const PixelGraph& g, ContourMap& ucm) {
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const std::size_t a = d.basin_of_vertex[g.edges[e][0]];
    const std::size_t b = d.basin_of_vertex[g.edges[e][1]];
    if (a == b) continue;
    const auto alt = static_cast<float>(d.altitude[d.lca(a, b)]);
    for (std::uint32_t v : g.edges[e]) {
      float& px = ucm[g.vertices[v]];
      px = std::max(px, alt);
    }
  }
}

// Builds the filtered candidate set of one frame. Components are processed
// in raster order of their first pixel.
inline FrameCandidates extract_frame_candidates(const ForegroundMask& foreground,
                                                const ContourMap& contour, std::int32_t frame,
                                                const FilterParams& params,
                                                ContourMap* ucm = nullptr) {
  if (foreground.dims() != contour.dims()) {
    throw std::invalid_argument("extract_frame_candidates: foreground and contour dims differ");
  }
  FrameCandidates out;
  out.frame = frame;
  out.dims = foreground.dims();
  out.shape = Shape::of(foreground.dims());
  if (ucm) *ucm = ContourMap(foreground.dims(), 0.0f);
  auto comps = component_pixels(foreground);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const PixelGraph g = build_pixel_graph(std::move(comps[c]), out.shape, contour);
    const RegionDendrogram d = watershed_by_area(g);
    if (ucm) paint_ucm(d, g, *ucm);
    auto cc = filter_and_extract(d, g, out.shape, params);
    if (cc.segments.empty()) {
      ++out.emptied_components;
      continue;
    }
    const auto offset = static_cast<std::int32_t>(out.segments.size());
    for (auto& s : cc.segments) {
      s.frame = frame;
      s.component = static_cast<std::int32_t>(c);
      out.segments.push_back(std::move(s));
    }
    for (auto [a, b] : cc.exclusions) out.exclusions.emplace_back(a + offset, b + offset);
  }
  return out;
}

}  // namespace ucmtrack
