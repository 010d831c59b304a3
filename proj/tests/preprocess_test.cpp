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

#include <cmath>
#include <random>

#include "ucmtrack/hierarchy.hpp"
#include "ucmtrack/preprocess.hpp"

namespace ucmtrack {
namespace {

// Direct 2D convolution with the full (non-separable) truncated kernel and
// mirrored borders.
std::vector<double> direct_blur(const std::vector<double>& img, std::size_t h, std::size_t w, double sigma) {
  const auto r = static_cast<std::ptrdiff_t>(std::ceil(3 * sigma));
  auto mirror = [](std::ptrdiff_t i, std::ptrdiff_t n) {
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
    return static_cast<std::size_t>(i);
  };
  double norm = 0;
  for (std::ptrdiff_t dy = -r; dy <= r; ++dy)
    for (std::ptrdiff_t dx = -r; dx <= r; ++dx) norm += std::exp(-0.5 * double(dy * dy + dx * dx) / (sigma * sigma));
  std::vector<double> out(img.size());
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double acc = 0;
      for (std::ptrdiff_t dy = -r; dy <= r; ++dy)
        for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
          const double k = std::exp(-0.5 * double(dy * dy + dx * dx) / (sigma * sigma));
          acc += k * img[mirror(std::ptrdiff_t(y) + dy, std::ptrdiff_t(h)) * w +
                         mirror(std::ptrdiff_t(x) + dx, std::ptrdiff_t(w))];
        }
      out[y * w + x] = acc / norm;
    }
  return out;
}

Tensor<float> blob_image(std::size_t h, std::size_t w, double cy, double cx, double s) {
  Tensor<float> img({h, w}, 0.0f);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      img[y * w + x] = static_cast<float>(100 * std::exp(-((y - cy) * (y - cy) + (x - cx) * (x - cx)) / (2 * s * s)));
  return img;
}

TEST(Otsu, StepSignal) {
  const Tensor<float> v({6}, std::vector<float>{0, 0, 0, 10, 10, 10});
  const auto mask = otsu_mask(v);
  EXPECT_EQ(mask.data(), (std::vector<std::uint8_t>{0, 0, 0, 1, 1, 1}));
}

TEST(Otsu, MatchesExhaustiveSearchOnIntegerValues) {
  // With values spanning exactly 0..255 each integer falls in its own bin, so
  // the binned search must agree with a direct search over raw thresholds.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<float> vals{0, 255};
    const int n = 5 + static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) vals.push_back(static_cast<float>(rng() % 256));
    double best = -1;
    int best_k = 0;
    for (int k = 0; k < 255; ++k) {
      double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
      for (float v : vals) (v <= k ? (n0 += 1, s0 += v) : (n1 += 1, s1 += v));
      if (n0 == 0 || n1 == 0) continue;
      const double N = static_cast<double>(vals.size());
      const double d = s0 / n0 - s1 / n1;
      const double between = (n0 / N) * (n1 / N) * d * d;
      if (between > best + 1e-9 * std::abs(best)) {
        best = between;
        best_k = k;
      }
    }
    const auto res = otsu_threshold(vals);
    // Equal variances are possible when no value lies between two splits.
    std::vector<std::uint8_t> want, got;
    for (float v : vals) {
      want.push_back(v > best_k);
      got.push_back(v > res.split_bin);
    }
    ASSERT_EQ(got, want) << "trial " << trial;
  }
}

TEST(Foreground, ConstantImageIsEmptyAndFlagged) {
  const Tensor<float> img({8, 8}, 0.0f);
  const auto r = detect_foreground(img, 1.0, 4.0);
  EXPECT_TRUE(r.degenerate);
  for (auto v : r.mask.data()) EXPECT_EQ(v, 0);
  EXPECT_THROW(detect_foreground(img, 4.0, 1.0), std::invalid_argument);
}

TEST(Foreground, BlurMatchesDirectConvolution) {
  const auto img = blob_image(24, 20, 10.3, 8.7, 2.5);
  const std::vector<double> ref = direct_blur(std::vector<double>(img.data().begin(), img.data().end()), 24, 20, 1.5);
  const auto got = gaussian_blur(img.data(), Shape::of(img.dims()), 1.5);
  for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR(got[i], ref[i], 1e-3);
}

TEST(Foreground, BlobPeakInsideOneConnectedRegion) {
  const std::size_t h = 32, w = 32;
  const auto img = blob_image(h, w, 15, 17, 3);
  const auto r = detect_foreground(img, 1.0, 4.0);
  // Reference DoG by direct convolution; the mask must contain the argmax.
  const std::vector<double> base(img.data().begin(), img.data().end());
  const auto fine = direct_blur(base, h, w, 1.0), coarse = direct_blur(base, h, w, 4.0);
  std::size_t peak = 0;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    if (fine[i] - coarse[i] > fine[peak] - coarse[peak]) peak = i;
  }
  EXPECT_EQ(peak, 15 * w + 17);
  ASSERT_EQ(r.mask[peak], 1);
  const auto cc = connected_components(r.mask);
  std::uint16_t max_label = 0;
  for (auto l : cc.data()) max_label = std::max(max_label, l);
  EXPECT_EQ(max_label, 1);
}

TEST(Foreground, AffineRescalingInvariance) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor<float> img({16, 16});
    for (auto& v : img.data()) v = static_cast<float>(rng() % 50);
    const auto base = detect_foreground(img, 1.0, 3.0).mask;
    for (float a : {2.0f, 4.0f}) {
      for (float b : {0.0f, 7.0f, 100.0f}) {
        Tensor<float> s = img;
        for (auto& v : s.data()) v = a * v + b;
        ASSERT_EQ(detect_foreground(s, 1.0, 3.0).mask.data(), base.data());
      }
    }
  }
}

TEST(Contour, ConstantAndSinglePeak) {
  const Tensor<float> flat({4, 4}, 3.0f);
  const auto flat_contour = intensity_to_contour(flat, 1.0);
  for (float v : flat_contour.data()) EXPECT_EQ(v, 0.0f);
  Tensor<float> img({3, 3}, 0.0f);
  img[4] = 5;
  const auto c = intensity_to_contour(img, 0.0);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(c[i], i == 4 ? 0.0f : 1.0f);
}

TEST(Contour, RidgeBetweenBlobs) {
  Tensor<float> img({20, 40}, 0.0f);
  const auto a = blob_image(20, 40, 10, 10, 3), b = blob_image(20, 40, 10, 30, 3);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = a[i] + b[i];
  const auto c = intensity_to_contour(img, 1.0);
  EXPECT_GT(c[10 * 40 + 20], c[10 * 40 + 10]);
  EXPECT_GT(c[10 * 40 + 20], c[10 * 40 + 30]);
  for (float v : c.data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(LabelsToMaps, Examples) {
  const auto bg = labels_to_maps(LabelImage({3, 3}, 0));
  for (auto v : bg.foreground.data()) EXPECT_EQ(v, 0);
  for (auto v : bg.contour.data()) EXPECT_EQ(v, 0.0f);

  const auto row = labels_to_maps(LabelImage({4}, std::vector<std::uint16_t>{1, 1, 2, 2}));
  EXPECT_EQ(row.contour.data(), (std::vector<float>{0, 1, 1, 0}));
  EXPECT_EQ(row.foreground.data(), (std::vector<std::uint8_t>{1, 1, 1, 1}));
}

TEST(LabelsToMaps, BlockRingMatchesNeighborEnumeration) {
  LabelImage img({7, 7}, 0);
  for (std::size_t y = 2; y < 5; ++y)
    for (std::size_t x = 2; x < 5; ++x) img[y * 7 + x] = 4;
  const auto maps = labels_to_maps(img);
  // Enumerate every 4-neighbor pair by hand.
  std::vector<float> want(49, 0.0f);
  for (std::size_t y = 0; y < 7; ++y)
    for (std::size_t x = 0; x < 7; ++x) {
      const int dy[] = {-1, 1, 0, 0}, dx[] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const auto ny = static_cast<std::ptrdiff_t>(y) + dy[k], nx = static_cast<std::ptrdiff_t>(x) + dx[k];
        if (ny < 0 || nx < 0 || ny >= 7 || nx >= 7) continue;
        if (img[y * 7 + x] != img[static_cast<std::size_t>(ny) * 7 + static_cast<std::size_t>(nx)]) want[y * 7 + x] = 1;
      }
    }
  EXPECT_EQ(maps.contour.data(), want);
  std::size_t inner_ring = 0;
  for (std::size_t y = 2; y < 5; ++y)
    for (std::size_t x = 2; x < 5; ++x) inner_ring += maps.contour[y * 7 + x] == 1.0f;
  EXPECT_EQ(inner_ring, 8u);
  EXPECT_EQ(maps.contour[3 * 7 + 3], 0.0f);
}

TEST(Ensemble, Examples) {
  const ForegroundContour a{ForegroundMask({2}, std::vector<std::uint8_t>{1, 0}), ContourMap({2}, std::vector<float>{1, 0})};
  const ForegroundContour b{ForegroundMask({2}, std::vector<std::uint8_t>{0, 1}), ContourMap({2}, std::vector<float>{0, 1})};
  const std::vector<ForegroundContour> one{a};
  const auto same = ensemble_combine(one);
  EXPECT_EQ(same.foreground.data(), a.foreground.data());
  EXPECT_EQ(same.contour.data(), a.contour.data());
  const std::vector<ForegroundContour> two{a, b};
  const auto both = ensemble_combine(two);
  EXPECT_EQ(both.foreground.data(), (std::vector<std::uint8_t>{1, 1}));
  EXPECT_EQ(both.contour.data(), (std::vector<float>{0.5f, 0.5f}));
  const ForegroundContour none{ForegroundMask({2}, 0), ContourMap({2}, 0.0f)};
  const std::vector<ForegroundContour> three{none, a, none};
  EXPECT_EQ(ensemble_combine(three).foreground[0], 1);
  EXPECT_THROW(ensemble_combine(std::vector<ForegroundContour>{}), std::invalid_argument);
  const ForegroundContour odd{ForegroundMask({3}, 0), ContourMap({3}, 0.0f)};
  EXPECT_THROW(ensemble_combine(std::vector<ForegroundContour>{a, odd}), std::invalid_argument);
}

TEST(Ensemble, SupersetAndBoundedContours) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ForegroundContour> maps;
    const std::size_t n = 1 + rng() % 4;
    for (std::size_t s = 0; s < n; ++s) {
      LabelImage img({6, 6});
      for (auto& v : img.data()) v = static_cast<std::uint16_t>(rng() % 4);
      maps.push_back(labels_to_maps(img));
    }
    const auto out = ensemble_combine(maps);
    for (std::size_t i = 0; i < out.foreground.size(); ++i) {
      float lo = 1, hi = 0;
      for (const auto& m : maps) {
        ASSERT_GE(out.foreground[i], m.foreground[i]);
        lo = std::min(lo, m.contour[i]);
        hi = std::max(hi, m.contour[i]);
      }
      ASSERT_GE(out.contour[i], lo);
      ASSERT_LE(out.contour[i], hi);
    }
  }
}

}  // namespace
}  // namespace ucmtrack
