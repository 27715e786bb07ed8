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

#include "pushpull/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pushpull {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kOutOfRange: return "out of range";
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kIo: return "io error";
    case ErrorCode::kMissingContext: return "missing context";
    case ErrorCode::kDiverged: return "diverged";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

namespace {

void check_extents(const Shape& shape) {
  for (auto d : shape) {
    if (d == 0) {
      fail(ErrorCode::kInvalidArgument,
           "tensor extents must be positive, got " + shape_str(shape));
    }
  }
}

}  // namespace

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill)
    : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {
  check_extents(shape_);
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_extents(shape_);
  if (shape_numel(shape_) != data_.size()) {
    fail(ErrorCode::kShapeMismatch,
         "tensor shape " + shape_str(shape_) + " holds " +
             std::to_string(shape_numel(shape_)) + " values, got " +
             std::to_string(data_.size()));
  }
}

template <typename T>
std::size_t BasicTensor<T>::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    fail(ErrorCode::kOutOfRange, "axis " + std::to_string(axis) +
                                     " of tensor " + shape_str(shape_));
  }
  return shape_[axis];
}

template <typename T>
T& BasicTensor<T>::at(std::size_t n, std::size_t c, std::size_t y,
                      std::size_t x) {
  return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
}

template <typename T>
const T& BasicTensor<T>::at(std::size_t n, std::size_t c, std::size_t y,
                            std::size_t x) const {
  return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
}

template <typename T>
BasicTensor<T> BasicTensor<T>::reshaped(Shape shape) const& {
  return BasicTensor(std::move(shape), data_);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::reshaped(Shape shape) && {
  return BasicTensor(std::move(shape), std::move(data_));
}

template <typename T>
void BasicTensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
bool BasicTensor<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](T v) { return std::isfinite(v); });
}

template <typename T>
void check_finite(const BasicTensor<T>& t, const char* what) {
  if (!t.all_finite()) {
    fail(ErrorCode::kDiverged,
         std::string(what) + " contains NaN or Inf, shape " +
             shape_str(t.shape()));
  }
}

template class BasicTensor<float>;
template class BasicTensor<double>;
template void check_finite(const BasicTensor<float>&, const char*);
template void check_finite(const BasicTensor<double>&, const char*);

}  // namespace pushpull
