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

// Synthetic timelapses of moving, dividing round cells with exact labels.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucmtrack/io.hpp"
#include "ucmtrack/tensor.hpp"

namespace ucmtrack {

struct SynthConfig {
  std::vector<std::size_t> dims{128, 128};  // (y, x) or (z, y, x)
  std::size_t frames = 10;
  std::size_t cells = 5;
  double motion_sigma = 1.0;          // random-walk step per axis, pixels
  double division_probability = 0.0;  // per cell and frame
  double radius_min = 5, radius_max = 8;
  double gap = 3;           // minimum free space between cell borders
  double edge_width = 1.0;  // blur of the intensity profile edge
  double intensity = 1.0;
  double background = 0.1;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (dims.size() != 2 && dims.size() != 3) throw std::invalid_argument("synth: dims must have 2 or 3 axes");
    for (std::size_t d : dims) {
      if (d < 1) throw std::invalid_argument("synth: dims must be positive");
    }
    if (frames < 1) throw std::invalid_argument("synth: frames must be >= 1");
    if (!(radius_min >= 1) || !(radius_max >= radius_min)) {
      throw std::invalid_argument("synth: need 1 <= radius_min <= radius_max");
    }
    if (!(division_probability >= 0 && division_probability <= 1)) {
      throw std::invalid_argument("synth: division_probability must be in [0, 1]");
    }
    if (!(motion_sigma >= 0) || !(gap > 0) || !(edge_width > 0) || !(noise_sigma >= 0)) {
      throw std::invalid_argument("synth: motion_sigma, noise_sigma >= 0 and gap, edge_width > 0 required");
    }
  }
};

struct SynthResult {
  Tensor<float> intensity;  // (t, [z,] y, x)
  LabelImage labels;
  TrackTable tracks;
};

class SynthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct SynthCell {
  std::array<double, 3> center;  // (z, y, x)
  double radius;
  std::uint32_t label;
};

class CellField {
 public:
  explicit CellField(const SynthConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    if (cfg.dims.size() == 3) extent_ = {cfg.dims[0], cfg.dims[1], cfg.dims[2]};
    else extent_ = {1, cfg.dims[0], cfg.dims[1]};
  }

  SynthResult run() {
    SynthResult out;
    std::vector<float> intensity;
    std::vector<std::uint16_t> labels;
    for (std::size_t i = 0; i < cfg_.cells; ++i) place_initial();
    for (std::size_t t = 0; t < cfg_.frames; ++t) {
      if (t > 0) step(static_cast<std::uint32_t>(t));
      render(intensity, labels);
      for (const auto& c : cells_) ends_[c.label - 1] = static_cast<std::uint32_t>(t);
    }
    std::vector<std::size_t> dims{cfg_.frames};
    dims.insert(dims.end(), cfg_.dims.begin(), cfg_.dims.end());
    out.intensity = Tensor<float>(dims, std::move(intensity));
    out.labels = LabelImage(dims, std::move(labels));
    out.tracks.records = std::move(records_);
    for (auto& r : out.tracks.records) r.end = ends_[r.label - 1];
    return out;
  }

 private:
  bool is3d() const { return cfg_.dims.size() == 3; }

  bool inside(const std::array<double, 3>& c, double r) const {
    for (std::size_t a = is3d() ? 0 : 1; a < 3; ++a) {
      if (c[a] - r < 0 || c[a] + r > static_cast<double>(extent_[a] - 1)) return false;
    }
    return true;
  }

  // Free of every cell except those listed in `skip`.
  bool free(const std::array<double, 3>& c, double r, std::size_t skip_a, std::size_t skip_b) const {
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      if (i == skip_a || i == skip_b) continue;
      double d2 = 0;
      for (std::size_t a = 0; a < 3; ++a) d2 += (c[a] - cells_[i].center[a]) * (c[a] - cells_[i].center[a]);
      const double need = r + cells_[i].radius + cfg_.gap;
      if (d2 < need * need) return false;
    }
    return true;
  }

  std::array<double, 3> uniform_center(double r) {
    std::array<double, 3> c{0, 0, 0};
    for (std::size_t a = is3d() ? 0 : 1; a < 3; ++a) {
      std::uniform_real_distribution<double> u(r, static_cast<double>(extent_[a] - 1) - r);
      c[a] = u(rng_);
    }
    return c;
  }

  std::uint32_t new_track(std::uint32_t begin, std::uint32_t parent) {
    const auto label = static_cast<std::uint32_t>(records_.size() + 1);
    if (label > 65535) throw SynthError("synth: more than 65535 tracks");
    records_.push_back({label, begin, begin, parent});
    ends_.push_back(begin);
    return label;
  }

  void place_initial() {
    std::uniform_real_distribution<double> rad(cfg_.radius_min, cfg_.radius_max);
    const double r = rad(rng_);
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const auto c = uniform_center(r);
      if (inside(c, r) && free(c, r, npos, npos)) {
        cells_.push_back({c, r, new_track(0, 0)});
        return;
      }
    }
    throw SynthError("synth: cannot place " + std::to_string(cfg_.cells) + " disjoint cells in the volume");
  }

  void step(std::uint32_t t) {
    std::bernoulli_distribution divide(cfg_.division_probability);
    std::normal_distribution<double> move(0.0, cfg_.motion_sigma);
    std::uniform_real_distribution<double> angle(0.0, 2 * 3.14159265358979323846);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const std::size_t n = cells_.size();
    std::vector<SynthCell> born;
    for (std::size_t i = 0; i < n; ++i) {
      SynthCell& cell = cells_[i];
      if (divide(rng_)) {
        const double rc = std::max(cfg_.radius_min, cell.radius * 0.8);
        const double off = rc + cfg_.gap / 2 + 0.5;
        bool done = false;
        for (int attempt = 0; attempt < 50 && !done; ++attempt) {
          const double theta = angle(rng_);
          std::array<double, 3> dir{0, std::sin(theta), std::cos(theta)};
          if (is3d()) {
            const double z = unit(rng_);
            const double s = std::sqrt(1 - z * z);
            dir = {z, dir[1] * s, dir[2] * s};
          }
          std::array<double, 3> a = cell.center, b = cell.center;
          for (std::size_t k = 0; k < 3; ++k) {
            a[k] += off * dir[k];
            b[k] -= off * dir[k];
          }
          if (!inside(a, rc) || !inside(b, rc) || !free(a, rc, i, npos) || !free(b, rc, i, npos)) continue;
          bool clash = false;
          for (const auto& o : born) {
            for (const auto& c : {a, b}) {
              double d2 = 0;
              for (std::size_t k = 0; k < 3; ++k) d2 += (c[k] - o.center[k]) * (c[k] - o.center[k]);
              if (d2 < (rc + o.radius + cfg_.gap) * (rc + o.radius + cfg_.gap)) clash = true;
            }
          }
          if (clash) continue;
          ends_[cell.label - 1] = t - 1;
          born.push_back({a, rc, new_track(t, cell.label)});
          born.push_back({b, rc, new_track(t, cell.label)});
          cell.label = 0;  // removed below
          done = true;
        }
        if (done) continue;
      }
      for (int attempt = 0; attempt < 20; ++attempt) {
        std::array<double, 3> c = cell.center;
        for (std::size_t k = is3d() ? 0 : 1; k < 3; ++k) c[k] += move(rng_);
        if (!inside(c, cell.radius) || !free(c, cell.radius, i, npos)) continue;
        bool clash = false;
        for (const auto& o : born) {
          double d2 = 0;
          for (std::size_t k = 0; k < 3; ++k) d2 += (c[k] - o.center[k]) * (c[k] - o.center[k]);
          if (d2 < (cell.radius + o.radius + cfg_.gap) * (cell.radius + o.radius + cfg_.gap)) clash = true;
        }
        if (clash) continue;
        cell.center = c;
        break;
      }
    }
    std::vector<SynthCell> next;
    for (const auto& c : cells_) {
      if (c.label) next.push_back(c);
    }
    next.insert(next.end(), born.begin(), born.end());
    cells_ = std::move(next);
  }

  void render(std::vector<float>& intensity, std::vector<std::uint16_t>& labels) {
    const std::size_t base = intensity.size();
    const std::size_t vol = extent_[0] * extent_[1] * extent_[2];
    intensity.resize(base + vol, static_cast<float>(cfg_.background));
    labels.resize(base + vol, 0);
    std::vector<double> acc(vol, cfg_.background);
    const double reach = 4 * cfg_.edge_width;
    for (const auto& c : cells_) {
      std::array<std::size_t, 3> lo{}, hi{};
      for (std::size_t a = 0; a < 3; ++a) {
        lo[a] = static_cast<std::size_t>(std::max(0.0, std::floor(c.center[a] - c.radius - reach)));
        hi[a] = static_cast<std::size_t>(
            std::min(static_cast<double>(extent_[a] - 1), std::ceil(c.center[a] + c.radius + reach)));
      }
      for (std::size_t z = lo[0]; z <= hi[0]; ++z)
        for (std::size_t y = lo[1]; y <= hi[1]; ++y)
          for (std::size_t x = lo[2]; x <= hi[2]; ++x) {
            const double dz = static_cast<double>(z) - c.center[0];
            const double dy = static_cast<double>(y) - c.center[1];
            const double dx = static_cast<double>(x) - c.center[2];
            const double d = std::sqrt(dz * dz + dy * dy + dx * dx);
            const std::size_t i = (z * extent_[1] + y) * extent_[2] + x;
            acc[i] += cfg_.intensity * 0.5 * std::erfc((d - c.radius) / (cfg_.edge_width * std::sqrt(2.0)));
            if (d <= c.radius) labels[base + i] = static_cast<std::uint16_t>(c.label);
          }
    }
    std::normal_distribution<double> noise(0.0, cfg_.noise_sigma);
    for (std::size_t i = 0; i < vol; ++i) {
      const double v = acc[i] + (cfg_.noise_sigma > 0 ? noise(rng_) : 0.0);
      intensity[base + i] = static_cast<float>(v);
    }
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  const SynthConfig& cfg_;
  std::mt19937_64 rng_;
  std::array<std::size_t, 3> extent_{};
  std::vector<SynthCell> cells_;
  std::vector<TrackRecord> records_;
  std::vector<std::uint32_t> ends_;
};

}  // namespace detail

inline SynthResult generate_timelapse(const SynthConfig& cfg) {
  cfg.validate();
  return detail::CellField(cfg).run();
}

}  // namespace ucmtrack
