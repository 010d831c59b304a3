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

// Foreground and contour map estimation from intensities or label images.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ucmtrack/tensor.hpp"

namespace ucmtrack {

// Truncated, normalized Gaussian taps for offsets [-radius, radius],
// radius = ceil(3 sigma). sigma == 0 yields the identity kernel.
inline std::vector<double> gaussian_kernel(double sigma) {
  if (sigma < 0) throw std::invalid_argument("gaussian_kernel: sigma must be >= 0");
  if (sigma == 0) return {1.0};
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

// Mirror index for "d c b a | a b c d" padding.
inline std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  const auto period = static_cast<std::ptrdiff_t>(2 * n);
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < static_cast<std::ptrdiff_t>(n) ? i : period - 1 - i);
}

// Separable Gaussian blur over every spatial axis of one frame.
inline std::vector<float> gaussian_blur(std::span<const float> values, const Shape& shape,
                                        double sigma) {
  std::vector<float> cur(values.begin(), values.end());
  const auto kernel = gaussian_kernel(sigma);
  if (kernel.size() == 1) return cur;
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  std::vector<float> next(cur.size());
  std::vector<double> line;
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const std::size_t n = shape.extent[axis];
    if (n == 1) continue;
    const std::size_t st = shape.stride(axis);
    line.resize(n);
    for (std::size_t base = 0; base < cur.size(); ++base) {
      if (shape.coords(base)[axis] != 0) continue;
      for (std::size_t i = 0; i < n; ++i) line[i] = cur[base + i * st];
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0;
        for (std::ptrdiff_t o = -radius; o <= radius; ++o) {
          acc += kernel[static_cast<std::size_t>(o + radius)] *
                 line[reflect_index(static_cast<std::ptrdiff_t>(i) + o, n)];
        }
        next[base + i * st] = static_cast<float>(acc);
      }
    }
    std::swap(cur, next);
  }
  return cur;
}

struct OtsuResult {
  // Highest bin index of the background class; values in bins above it are
  // foreground.
  int split_bin = 0;
  float threshold = 0;  // upper edge of split_bin in value units
  bool degenerate = false;  // constant input, no split possible
};

inline constexpr int kOtsuBins = 256;

inline int otsu_bin(float v, float lo, float hi) {
  const double rel = (static_cast<double>(v) - lo) / (static_cast<double>(hi) - lo);
  return std::clamp(static_cast<int>(std::floor(rel * kOtsuBins)), 0, kOtsuBins - 1);
}

// Otsu over 256 uniform bins spanning [min, max] of the values. The split
// maximizing between-class variance wins; ties go to the lower split.
inline OtsuResult otsu_threshold(std::span<const float> values) {
  OtsuResult res;
  if (values.empty()) {
    res.degenerate = true;
    return res;
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const float lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) {
    res.degenerate = true;
    res.threshold = hi;
    return res;
  }
  std::array<double, kOtsuBins> hist{};
  for (float v : values) hist[static_cast<std::size_t>(otsu_bin(v, lo, hi))] += 1;
  const double total = static_cast<double>(values.size());
  double total_mass = 0;
  for (int b = 0; b < kOtsuBins; ++b) total_mass += b * hist[static_cast<std::size_t>(b)];

  double w0 = 0, mass0 = 0, best = -1;
  for (int k = 0; k < kOtsuBins - 1; ++k) {
    w0 += hist[static_cast<std::size_t>(k)];
    mass0 += k * hist[static_cast<std::size_t>(k)];
    const double w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    const double mu0 = mass0 / w0, mu1 = (total_mass - mass0) / w1;
    const double between = (w0 / total) * (w1 / total) * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {
      best = between;
      res.split_bin = k;
    }
  }
  res.threshold = static_cast<float>(lo + (hi - lo) * (res.split_bin + 1) / double(kOtsuBins));
  return res;
}

// Foreground = values falling in bins above the Otsu split.
inline ForegroundMask otsu_mask(const Tensor<float>& response, OtsuResult* info = nullptr) {
  const OtsuResult r = otsu_threshold(response.data());
  if (info) *info = r;
  ForegroundMask mask(response.dims(), 0);
  if (r.degenerate) return mask;
  const auto [lo_it, hi_it] = std::minmax_element(response.data().begin(), response.data().end());
  for (std::size_t i = 0; i < response.size(); ++i) {
    mask[i] = otsu_bin(response[i], *lo_it, *hi_it) > r.split_bin ? 1 : 0;
  }
  return mask;
}

template <typename T>
Tensor<float> to_float(const Tensor<T>& t) {
  return Tensor<float>(t.dims(), std::vector<float>(t.data().begin(), t.data().end()));
}

struct ForegroundResult {
  ForegroundMask mask;
  bool degenerate = false;  // flat difference-of-Gaussians response
  float threshold = 0;
};

// Thresholds the difference of Gaussians G(sigma_low)*I - G(sigma_high)*I
// with Otsu.
template <typename T>
ForegroundResult detect_foreground(const Tensor<T>& image, double sigma_low, double sigma_high) {
  if (!(sigma_low < sigma_high)) {
    throw std::invalid_argument("detect_foreground: sigma_low must be smaller than sigma_high");
  }
  const Shape shape = Shape::of(image.dims());
  Tensor<float> img = to_float(image);
  // Remove the offset first so integer-exact rescalings map to exactly
  // rescaled responses.
  const float lo = *std::min_element(img.data().begin(), img.data().end());
  for (float& v : img.data()) v -= lo;
  const auto fine = gaussian_blur(img.data(), shape, sigma_low);
  const auto coarse = gaussian_blur(img.data(), shape, sigma_high);
  Tensor<float> dog(image.dims());
  for (std::size_t i = 0; i < dog.size(); ++i) dog[i] = fine[i] - coarse[i];
  ForegroundResult res;
  OtsuResult info;
  res.mask = otsu_mask(dog, &info);
  res.degenerate = info.degenerate;
  res.threshold = info.threshold;
  return res;
}

// 1 - minmax(G(sigma)*I); constant frames map to all zeros.
template <typename T>
ContourMap intensity_to_contour(const Tensor<T>& image, double sigma) {
  const Shape shape = Shape::of(image.dims());
  const Tensor<float> img = to_float(image);
  auto blurred = gaussian_blur(img.data(), shape, sigma);
  ContourMap out(image.dims(), 0.0f);
  const auto [lo_it, hi_it] = std::minmax_element(blurred.begin(), blurred.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(1.0 - (blurred[i] - lo) / (hi - lo));
  }
  return out;
}

struct ForegroundContour {
  ForegroundMask foreground;
  ContourMap contour;
};

// Foreground = labels > 0; contour = 1 where a face neighbor carries a
// different label (background included).
inline ForegroundContour labels_to_maps(const LabelImage& labels) {
  const Shape shape = Shape::of(labels.dims());
  ForegroundContour out{ForegroundMask(labels.dims(), 0), ContourMap(labels.dims(), 0.0f)};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.foreground[i] = labels[i] > 0 ? 1 : 0;
    shape.for_each_forward_neighbor(i, [&](std::size_t j) {
      if (labels[i] != labels[j]) {
        out.contour[i] = 1.0f;
        out.contour[j] = 1.0f;
      }
    });
  }
  return out;
}

// Foregrounds OR-ed, contours averaged.
inline ForegroundContour ensemble_combine(std::span<const ForegroundContour> maps) {
  if (maps.empty()) throw std::invalid_argument("ensemble_combine: no inputs");
  const auto& dims = maps[0].foreground.dims();
  for (const auto& m : maps) {
    if (m.foreground.dims() != dims || m.contour.dims() != dims) {
      throw std::invalid_argument("ensemble_combine: inputs have mismatched dims");
    }
  }
  ForegroundContour out{ForegroundMask(dims, 0), ContourMap(dims, 0.0f)};
  const double n = static_cast<double>(maps.size());
  for (std::size_t i = 0; i < out.foreground.size(); ++i) {
    double sum = 0;
    std::uint8_t any = 0;
    for (const auto& m : maps) {
      any |= m.foreground[i] ? 1 : 0;
      sum += m.contour[i];
    }
    out.foreground[i] = any;
    out.contour[i] = static_cast<float>(sum / n);
  }
  return out;
}

}  // namespace ucmtrack
