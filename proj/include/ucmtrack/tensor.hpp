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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace ucmtrack {

// Dense row-major raster. Dims are ordered slowest to fastest:
// (t optional, z optional, y, x).
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> dims, T fill = T{})
      : dims_(std::move(dims)) {
    check_dims(dims_);
    data_.assign(volume(dims_), fill);
  }

  Tensor(std::vector<std::size_t> dims, std::vector<T> data)
      : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims(dims_);
    if (data_.size() != volume(dims_)) {
      throw std::invalid_argument("tensor: data size " +
                                  std::to_string(data_.size()) +
                                  " does not match dims volume " +
                                  std::to_string(volume(dims_)));
    }
  }

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t ndim() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  // Sub-volume at index `t` along the leading axis.
  Tensor frame(std::size_t t) const {
    if (dims_.size() < 2) throw std::invalid_argument("tensor: no leading axis to slice");
    if (t >= dims_[0]) throw std::out_of_range("tensor: frame index out of range");
    std::vector<std::size_t> sub(dims_.begin() + 1, dims_.end());
    const std::size_t n = volume(sub);
    std::vector<T> values(data_.begin() + static_cast<std::ptrdiff_t>(t * n),
                          data_.begin() + static_cast<std::ptrdiff_t>((t + 1) * n));
    return Tensor(std::move(sub), std::move(values));
  }

  std::size_t frame_count() const { return dims_.empty() ? 0 : dims_[0]; }

  static std::size_t volume(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           std::multiplies<>());
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  static void check_dims(const std::vector<std::size_t>& dims) {
    if (dims.empty()) throw std::invalid_argument("tensor: at least one axis required");
    for (std::size_t d : dims) {
      if (d == 0) throw std::invalid_argument("tensor: axis lengths must be >= 1");
    }
  }

  std::vector<std::size_t> dims_;
  std::vector<T> data_;
};

template <typename T>
Tensor<T> stack_frames(const std::vector<Tensor<T>>& frames) {
  if (frames.empty()) throw std::invalid_argument("stack_frames: no frames");
  std::vector<std::size_t> dims{frames.size()};
  dims.insert(dims.end(), frames[0].dims().begin(), frames[0].dims().end());
  std::vector<T> data;
  data.reserve(Tensor<T>::volume(dims));
  for (const auto& f : frames) {
    if (f.dims() != frames[0].dims()) {
      throw std::invalid_argument("stack_frames: frames have different dims");
    }
    data.insert(data.end(), f.data().begin(), f.data().end());
  }
  return Tensor<T>(std::move(dims), std::move(data));
}

using LabelImage = Tensor<std::uint16_t>;
using ForegroundMask = Tensor<std::uint8_t>;
using ContourMap = Tensor<float>;

// Spatial extent of a single frame as (z, y, x); missing leading axes are 1.
struct Shape {
  std::array<std::size_t, 3> extent{1, 1, 1};

  static Shape of(const std::vector<std::size_t>& dims) {
    if (dims.empty() || dims.size() > 3) {
      throw std::invalid_argument("shape: frames must have 1 to 3 spatial axes");
    }
    Shape s;
    const std::size_t off = 3 - dims.size();
    for (std::size_t i = 0; i < dims.size(); ++i) s.extent[off + i] = dims[i];
    return s;
  }

  std::size_t size() const { return extent[0] * extent[1] * extent[2]; }
  std::size_t stride(std::size_t axis) const {
    return axis == 0 ? extent[1] * extent[2] : axis == 1 ? extent[2] : 1;
  }
  std::array<std::size_t, 3> coords(std::size_t index) const {
    return {index / (extent[1] * extent[2]), (index / extent[2]) % extent[1],
            index % extent[2]};
  }
  std::size_t index(std::size_t z, std::size_t y, std::size_t x) const {
    return (z * extent[1] + y) * extent[2] + x;
  }

  // Calls fn(neighbor) for every face neighbor with a larger linear index.
  template <typename Fn>
  void for_each_forward_neighbor(std::size_t index, Fn&& fn) const {
    const auto c = coords(index);
    if (c[2] + 1 < extent[2]) fn(index + 1);
    if (c[1] + 1 < extent[1]) fn(index + extent[2]);
    if (c[0] + 1 < extent[0]) fn(index + extent[1] * extent[2]);
  }

  template <typename Fn>
  void for_each_neighbor(std::size_t index, Fn&& fn) const {
    const auto c = coords(index);
    for (std::size_t axis = 0; axis < 3; ++axis) {
      const std::size_t st = stride(axis);
      if (c[axis] > 0) fn(index - st);
      if (c[axis] + 1 < extent[axis]) fn(index + st);
    }
  }

  friend bool operator==(const Shape&, const Shape&) = default;
};

}  // namespace ucmtrack
