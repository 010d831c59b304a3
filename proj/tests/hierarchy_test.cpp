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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "oracles.hpp"
#include "ucmtrack/hierarchy.hpp"

namespace ucmtrack {
namespace {

using oracle::edge_saliency;
using oracle::line_graph;

TEST(ConnectedComponents, Examples) {
  EXPECT_EQ(connected_components(ForegroundMask({2, 2}, 0)).data(), std::vector<std::uint16_t>(4, 0));
  EXPECT_EQ(connected_components(ForegroundMask({1, 3}, std::vector<std::uint8_t>{1, 0, 1})).data(),
            (std::vector<std::uint16_t>{1, 0, 2}));
  EXPECT_EQ(connected_components(ForegroundMask({2, 2}, std::vector<std::uint8_t>{1, 0, 0, 1})).data(),
            (std::vector<std::uint16_t>{1, 0, 0, 2}));
  // 3D face connectivity across slices
  EXPECT_EQ(connected_components(ForegroundMask({2, 1, 2}, std::vector<std::uint8_t>{1, 0, 1, 1})).data(),
            (std::vector<std::uint16_t>{1, 0, 1, 1}));
}

TEST(PixelGraph, Examples) {
  const auto two = line_graph({0.2f, 0.6f});
  ASSERT_EQ(two.edge_count(), 1u);
  EXPECT_FLOAT_EQ(two.weights[0], 0.4f);

  const ContourMap zero({2, 2}, 0.0f);
  const auto block = build_pixel_graph({0, 1, 2, 3}, Shape::of(zero.dims()), zero);
  EXPECT_EQ(block.edge_count(), 4u);
  for (float w : block.weights) EXPECT_EQ(w, 0.0f);

  const auto single = line_graph({0.7f});
  EXPECT_EQ(single.edge_count(), 0u);
  const auto d = watershed_by_area(single);
  EXPECT_EQ(d.size(), 1u);
  EXPECT_EQ(d.area[0], 1u);
}

TEST(Watershed, FourPixelLine) {
  const auto g = line_graph({0, 0, 1, 0.4f});
  const auto d = watershed_by_area(g);
  ASSERT_EQ(d.leaf_count, 2u);
  EXPECT_EQ(d.basin_of_vertex[0], d.basin_of_vertex[1]);
  EXPECT_EQ(d.basin_of_vertex[1], d.basin_of_vertex[2]);
  EXPECT_NE(d.basin_of_vertex[2], d.basin_of_vertex[3]);
  EXPECT_EQ(d.altitude[d.root()], 1.0);
  EXPECT_EQ(d.area[d.root()], 4u);
  const std::vector<double> want = oracle::flooding_saliency_1d({0, 0, 1, 0.4f});
  EXPECT_EQ(edge_saliency(d, g), want);
}

TEST(Watershed, UniformWeightsGiveOneBasin) {
  const ContourMap c({2, 3}, 0.5f);
  const auto d = watershed_by_area(build_pixel_graph({0, 1, 2, 3, 4, 5}, Shape::of(c.dims()), c));
  EXPECT_EQ(d.leaf_count, 1u);
  EXPECT_EQ(d.size(), 1u);
  EXPECT_EQ(d.area[0], 6u);
}

TEST(Watershed, EqualAreaBasins) {
  const std::vector<float> v{0, 0, 1, 1, 0, 0};
  const auto g = line_graph(v);
  const auto d = watershed_by_area(g);
  ASSERT_EQ(d.leaf_count, 2u);
  EXPECT_EQ(d.altitude[d.root()], 3.0);
  EXPECT_EQ(d.area[0], 3u);
  EXPECT_EQ(d.area[1], 3u);
  EXPECT_EQ(edge_saliency(d, g), oracle::flooding_saliency_1d(v));
}

TEST(Watershed, MatchesFloodingOracleOnRandomLines) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<float> v(2 + rng() % 20);
    const int levels = 2 + static_cast<int>(rng() % 6);
    for (auto& x : v) x = static_cast<float>(rng() % levels) / static_cast<float>(levels);
    const auto g = line_graph(v);
    const auto d = watershed_by_area(g);
    ASSERT_EQ(edge_saliency(d, g), oracle::flooding_saliency_1d(v)) << "trial " << trial;
  }
}

TEST(Watershed, NestedCutsOnRandomMaps) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t h = 3 + rng() % 6, w = 3 + rng() % 6;
    ContourMap c({h, w});
    for (auto& x : c.data()) x = static_cast<float>(rng() % 8) / 8.0f;
    std::vector<std::size_t> px(h * w);
    std::iota(px.begin(), px.end(), std::size_t{0});
    const auto g = build_pixel_graph(px, Shape::of(c.dims()), c);
    const auto d = watershed_by_area(g);
    const auto problem = oracle::hierarchy_problem(d, g);
    ASSERT_FALSE(problem) << "trial " << trial << ": " << *problem;
  }
}

TEST(Filter, NoOpFiltersKeepEveryNode) {
  const auto g = line_graph({0, 1, 0, 0.5f, 0.2f, 1, 0});
  const auto d = watershed_by_area(g);
  const auto cc = filter_and_extract(d, g, Shape::of({7}), FilterParams{});
  EXPECT_EQ(cc.segments.size(), d.size());
}

TEST(Filter, SmallLeafRemovedParentKept) {
  const auto g = line_graph({0, 0, 0, 0, 1, 0});
  const auto d = watershed_by_area(g);
  ASSERT_EQ(d.leaf_count, 2u);
  const auto cc = filter_and_extract(d, g, Shape::of({6}), FilterParams{2, 100, 0});
  ASSERT_EQ(cc.segments.size(), 2u);
  EXPECT_EQ(cc.segments[0].area, 5u);
  EXPECT_EQ(cc.segments[1].area, 6u);
  EXPECT_EQ(cc.exclusions, (std::vector<std::pair<std::int32_t, std::int32_t>>{{0, 1}}));
  // Max size cut: only the large leaf remains.
  const auto capped = filter_and_extract(d, g, Shape::of({6}), FilterParams{2, 5, 0});
  ASSERT_EQ(capped.segments.size(), 1u);
  EXPECT_EQ(capped.segments[0].area, 5u);
  EXPECT_THROW(filter_and_extract(d, g, Shape::of({6}), FilterParams{6, 5, 0}), std::invalid_argument);
}

TEST(Filter, WeakFrontierFusesChildren) {
  const std::vector<float> v{0, 0, 0.2f, 0, 0};
  const auto g = line_graph(v);
  const auto d = watershed_by_area(g);
  ASSERT_EQ(d.leaf_count, 2u);
  // Frontier mean by enumerating adjacent pixel pairs in different basins.
  double sum = 0;
  int pairs = 0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (d.basin_of_vertex[i] != d.basin_of_vertex[i + 1]) {
      sum += (double(v[i]) + v[i + 1]) / 2;
      ++pairs;
    }
  }
  ASSERT_EQ(pairs, 1);
  EXPECT_NEAR(frontier_strength(d, g)[d.root()], sum / pairs, 1e-7);
  const auto fused = filter_and_extract(d, g, Shape::of({5}), FilterParams{1, 100, 0.3});
  ASSERT_EQ(fused.segments.size(), 1u);
  EXPECT_EQ(fused.segments[0].area, 5u);
  const auto kept = filter_and_extract(d, g, Shape::of({5}), FilterParams{1, 100, 0.05});
  EXPECT_EQ(kept.segments.size(), 3u);
}

TEST(Candidates, ExclusionsEqualStrictContainment) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t h = 4 + rng() % 8, w = 4 + rng() % 8;
    ForegroundMask fg({h, w});
    ContourMap c({h, w});
    for (auto& x : fg.data()) x = rng() % 5 != 0;
    for (auto& x : c.data()) x = static_cast<float>(rng() % 10) / 10.0f;
    const FilterParams params{1 + rng() % 3, 10 + rng() % 40, (rng() % 3) * 0.2};
    const auto f = extract_frame_candidates(fg, c, 0, params);
    const Shape shape = Shape::of(fg.dims());
    std::vector<std::vector<std::uint8_t>> masks;
    for (const auto& s : f.segments) {
      ASSERT_GE(s.area, params.min_size);
      ASSERT_LE(s.area, params.max_size);
      masks.push_back(oracle::rasterize(s, shape));
      for (std::size_t i = 0; i < masks.back().size(); ++i) {
        if (masks.back()[i]) {
          ASSERT_EQ(fg[i], 1);
        }
      }
    }
    std::set<std::pair<std::int32_t, std::int32_t>> excl(f.exclusions.begin(), f.exclusions.end());
    ASSERT_EQ(excl.size(), f.exclusions.size());
    for (std::size_t p = 0; p < masks.size(); ++p) {
      for (std::size_t q = 0; q < masks.size(); ++q) {
        if (p == q) continue;
        std::size_t inter = 0, ap = 0, aq = 0;
        for (std::size_t i = 0; i < masks[p].size(); ++i) {
          inter += masks[p][i] && masks[q][i];
          ap += masks[p][i];
          aq += masks[q][i];
        }
        const bool subset = inter == ap && ap < aq;
        ASSERT_EQ(subset, excl.count({static_cast<std::int32_t>(p), static_cast<std::int32_t>(q)}) == 1);
        // Nested or disjoint, never a partial overlap.
        ASSERT_TRUE(inter == 0 || inter == ap || inter == aq);
        ASSERT_FALSE(inter == ap && ap == aq);
      }
    }
  }
}

}  // namespace
}  // namespace ucmtrack
