/* Copyright 2026 The pushpull Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef PUSHPULL_TENSOR_HPP_
#define PUSHPULL_TENSOR_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pushpull/error.hpp"

namespace pushpull {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major tensor. 4-D activations are (batch, channels, height,
// width); 4-D kernels are (out-channels, in-channels, height, width).
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T{0});
  BasicTensor(Shape shape, std::vector<T> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() & noexcept { return data_; }
  std::span<const T> data() const& noexcept { return data_; }
  // A span into a temporary would dangle.
  std::span<const T> data() && = delete;
  const std::vector<T>& storage() const noexcept { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // 4-D element access, (n, c, y, x).
  T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x);
  const T& at(std::size_t n, std::size_t c, std::size_t y,
              std::size_t x) const;

  // Same data, new extents; the element count must not change.
  BasicTensor reshaped(Shape shape) const&;
  BasicTensor reshaped(Shape shape) &&;

  void fill(T value);
  bool all_finite() const;

  // Bitwise comparison of shape and values.
  friend bool operator==(const BasicTensor& a, const BasicTensor& b) = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

// Converts between precisions (used to run float64 gradient checks against
// layers that normally train in float32).
template <typename To, typename From>
BasicTensor<To> tensor_cast(const BasicTensor<From>& t) {
  std::vector<To> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<To>(t[i]);
  return BasicTensor<To>(t.shape(), std::move(out));
}

template <typename T>
void check_finite(const BasicTensor<T>& t, const char* what);

}  // namespace pushpull

#endif  // PUSHPULL_TENSOR_HPP_
