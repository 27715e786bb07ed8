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

#include "pushpull/pushpull_layer.hpp"

#include <cmath>
#include <string>

namespace pushpull {

void PushPullConfig::validate() const {
  if (in_channels == 0 || out_channels == 0) {
    fail(ErrorCode::kInvalidArgument,
         "pushpull: channel counts must be positive");
  }
  if (kernel_size == 0 || kernel_size % 2 == 0) {
    fail(ErrorCode::kInvalidArgument,
         "pushpull: kernel size must be a positive odd integer, got " +
             std::to_string(kernel_size));
  }
  if (!(alpha >= 0) || !std::isfinite(alpha)) {
    fail(ErrorCode::kInvalidArgument,
         "pushpull: alpha must be >= 0, got " + std::to_string(alpha));
  }
  if (!(upsample >= 1) || !std::isfinite(upsample)) {
    fail(ErrorCode::kInvalidArgument,
         "pushpull: upsampling factor must be >= 1, got " +
             std::to_string(upsample));
  }
  if (stride == 0) {
    fail(ErrorCode::kInvalidArgument, "pushpull: stride must be positive");
  }
}

std::size_t PushPullConfig::pull_kernel_size() const {
  return pushpull::pull_kernel_size(kernel_size, upsample);
}

std::size_t pull_kernel_size(std::size_t kernel_size, double h) {
  if (!(h >= 1) || !std::isfinite(h)) {
    fail(ErrorCode::kInvalidArgument,
         "derive_pull: upsampling factor must be >= 1, got " +
             std::to_string(h));
  }
  auto size = static_cast<std::size_t>(
      std::llround(static_cast<double>(kernel_size) * h));
  if (size % 2 == 0) ++size;
  return size;
}

std::vector<double> bilinear_resize_weights(std::size_t from, std::size_t to) {
  std::vector<double> w(to * from, 0.0);
  for (std::size_t u = 0; u < to; ++u) {
    // Integer arithmetic keeps the source position exact (h == 1 maps onto
    // the identity with no rounding).
    std::size_t num = to > 1 ? u * (from - 1) : (from - 1);
    std::size_t den = to > 1 ? to - 1 : 2;
    const std::size_t i0 = num / den;
    const std::size_t rem = num % den;
    if (rem == 0) {
      w[u * from + i0] = 1.0;
    } else {
      const double frac = static_cast<double>(rem) / static_cast<double>(den);
      w[u * from + i0] = 1.0 - frac;
      w[u * from + i0 + 1] = frac;
    }
  }
  return w;
}

namespace {

void require_square_odd(const Shape& s, const char* op) {
  if (s.size() != 4 || s[2] != s[3]) {
    fail(ErrorCode::kShapeMismatch, std::string(op) +
                                        ": expected a square 4-D kernel, got " +
                                        shape_str(s));
  }
}

// out[u,v] = scale * sum_ij a[u,i] b[v,j] in[i,j] for each (o,c) slice.
template <typename T>
BasicTensor<T> separable_map(const BasicTensor<T>& in, std::size_t to,
                             const std::vector<double>& rows,
                             std::size_t from, T scale) {
  const std::size_t slices = in.dim(0) * in.dim(1);
  BasicTensor<T> out({in.dim(0), in.dim(1), to, to});
  std::vector<T> tmp(from * to);
  for (std::size_t s = 0; s < slices; ++s) {
    const T* src = in.data().data() + s * from * from;
    T* dst = out.data().data() + s * to * to;
    // tmp[i, v] = sum_j rows[v, j] * src[i, j]
    for (std::size_t i = 0; i < from; ++i) {
      for (std::size_t v = 0; v < to; ++v) {
        T acc = 0;
        for (std::size_t j = 0; j < from; ++j) {
          acc += static_cast<T>(rows[v * from + j]) * src[i * from + j];
        }
        tmp[i * to + v] = acc;
      }
    }
    for (std::size_t u = 0; u < to; ++u) {
      for (std::size_t v = 0; v < to; ++v) {
        T acc = 0;
        for (std::size_t i = 0; i < from; ++i) {
          acc += static_cast<T>(rows[u * from + i]) * tmp[i * to + v];
        }
        dst[u * to + v] = scale * acc;
      }
    }
  }
  return out;
}

// Transpose of `to x from` weights: (from x to).
std::vector<double> transpose(const std::vector<double>& w, std::size_t rows,
                              std::size_t cols) {
  std::vector<double> t(w.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) t[c * rows + r] = w[r * cols + c];
  }
  return t;
}

}  // namespace

template <typename T>
BasicTensor<T> derive_pull(const BasicTensor<T>& push, double h) {
  require_square_odd(push.shape(), "derive_pull");
  const std::size_t k = push.dim(2);
  if (k % 2 == 0) {
    fail(ErrorCode::kInvalidArgument,
         "derive_pull: push kernel size must be odd, got " + std::to_string(k));
  }
  const std::size_t kp = pull_kernel_size(k, h);
  return separable_map(push, kp, bilinear_resize_weights(k, kp), k, T{-1});
}

template <typename T>
BasicTensor<T> derive_pull_adjoint(const BasicTensor<T>& grad_pull,
                                   std::size_t kernel_size, double h) {
  require_square_odd(grad_pull.shape(), "derive_pull_adjoint");
  const std::size_t kp = pull_kernel_size(kernel_size, h);
  if (grad_pull.dim(2) != kp) {
    fail(ErrorCode::kShapeMismatch,
         "derive_pull_adjoint: gradient is " + std::to_string(grad_pull.dim(2)) +
             "x" + std::to_string(grad_pull.dim(3)) + ", expected " +
             std::to_string(kp) + "x" + std::to_string(kp));
  }
  return separable_map(
      grad_pull, kernel_size,
      transpose(bilinear_resize_weights(kernel_size, kp), kp, kernel_size), kp,
      T{-1});
}

template <typename T>
BasicPushPullLayer<T>::BasicPushPullLayer(PushPullConfig config)
    : config_(config) {
  config_.validate();
  push_kernel_ = BasicParameter<T>(BasicTensor<T>(
      {config_.out_channels, config_.in_channels, config_.kernel_size,
       config_.kernel_size}));
  if (config_.bias) {
    bias_ = BasicParameter<T>(BasicTensor<T>({config_.out_channels}));
  }
}

template <typename T>
BasicPushPullLayer<T>::BasicPushPullLayer(PushPullConfig config,
                                          BasicTensor<T> push_kernel,
                                          BasicTensor<T> bias)
    : BasicPushPullLayer(config) {
  if (push_kernel.shape() != push_kernel_.value.shape()) {
    fail(ErrorCode::kShapeMismatch,
         "pushpull: push kernel " + shape_str(push_kernel.shape()) +
             ", config expects " + shape_str(push_kernel_.value.shape()));
  }
  push_kernel_.value = std::move(push_kernel);
  if (config_.bias && !bias.empty()) {
    if (bias.shape() != bias_.value.shape()) {
      fail(ErrorCode::kShapeMismatch,
           "pushpull: bias " + shape_str(bias.shape()) + ", config expects " +
               shape_str(bias_.value.shape()));
    }
    bias_.value = std::move(bias);
  }
}

template <typename T>
void BasicPushPullLayer<T>::initialize(std::mt19937_64& rng) {
  const double fan_in = static_cast<double>(
      config_.in_channels * config_.kernel_size * config_.kernel_size);
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
  for (auto& w : push_kernel_.value.data()) w = static_cast<T>(normal(rng));
  if (config_.bias) bias_.value.fill(T{0});
}

template <typename T>
Conv2dGeometry BasicPushPullLayer<T>::push_geometry() const {
  return Conv2dGeometry::same(config_.kernel_size, config_.stride);
}

template <typename T>
Conv2dGeometry BasicPushPullLayer<T>::pull_geometry() const {
  return Conv2dGeometry::same(config_.pull_kernel_size(), config_.stride);
}

template <typename T>
BasicTensor<T> BasicPushPullLayer<T>::pull_kernel() const {
  return derive_pull(push_kernel_.value, config_.upsample);
}

template <typename T>
BasicTensor<T> BasicPushPullLayer<T>::forward(
    const BasicTensor<T>& input) const {
  Context ctx;
  return forward(input, ctx);
}

template <typename T>
BasicTensor<T> BasicPushPullLayer<T>::forward(const BasicTensor<T>& input,
                                              Context& ctx) const {
  if (input.rank() != 4 || input.dim(1) != config_.in_channels) {
    fail(ErrorCode::kShapeMismatch,
         "pushpull: expected input (B," + std::to_string(config_.in_channels) +
             ",H,W), got " + shape_str(input.shape()));
  }
  const std::span<const T> bias =
      config_.bias ? bias_.value.data() : std::span<const T>{};
  ctx.input = input;
  ctx.pull_kernel = pull_kernel();
  ctx.push_pre = conv2d(input, push_kernel_.value, bias, push_geometry());
  ctx.pull_pre = conv2d(input, ctx.pull_kernel, pull_geometry());
  if (ctx.push_pre.shape() != ctx.pull_pre.shape()) {
    fail(ErrorCode::kShapeMismatch,
         "pushpull: push map " + shape_str(ctx.push_pre.shape()) +
             " and pull map " + shape_str(ctx.pull_pre.shape()) + " differ");
  }
  const auto alpha = static_cast<T>(config_.alpha);
  BasicTensor<T> out(ctx.push_pre.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const T push = ctx.push_pre[i] > T{0} ? ctx.push_pre[i] : T{0};
    const T pull = ctx.pull_pre[i] > T{0} ? ctx.pull_pre[i] : T{0};
    out[i] = push - alpha * pull;
  }
  return out;
}

template <typename T>
typename BasicPushPullLayer<T>::Gradients BasicPushPullLayer<T>::backward(
    const BasicTensor<T>& grad_out, const Context& ctx) const {
  if (ctx.input.empty() || ctx.push_pre.empty() || ctx.pull_pre.empty()) {
    fail(ErrorCode::kMissingContext,
         "pushpull backward: forward context was not saved");
  }
  if (grad_out.shape() != ctx.push_pre.shape()) {
    fail(ErrorCode::kShapeMismatch,
         "pushpull backward: gradient " + shape_str(grad_out.shape()) +
             " does not match forward output " +
             shape_str(ctx.push_pre.shape()));
  }
  const auto alpha = static_cast<T>(config_.alpha);
  BasicTensor<T> grad_push(grad_out.shape());
  BasicTensor<T> grad_pull(grad_out.shape());
  for (std::size_t i = 0; i < grad_out.size(); ++i) {
    grad_push[i] = ctx.push_pre[i] > T{0} ? grad_out[i] : T{0};
    grad_pull[i] = ctx.pull_pre[i] > T{0} ? -alpha * grad_out[i] : T{0};
  }
  auto push = conv2d_backward(grad_push, ctx.input, push_kernel_.value,
                              push_geometry());
  auto pull = conv2d_backward(grad_pull, ctx.input, ctx.pull_kernel,
                              pull_geometry());
  Gradients g;
  g.grad_input = std::move(push.grad_input);
  add_inplace(g.grad_input, pull.grad_input);
  g.grad_kernel = std::move(push.grad_kernel);
  add_inplace(g.grad_kernel,
              derive_pull_adjoint(pull.grad_kernel, config_.kernel_size,
                                  config_.upsample));
  if (config_.bias) g.grad_bias = std::move(push.grad_bias);
  return g;
}

template <typename T>
BasicTensor<T> BasicPushPullLayer<T>::backward_accumulate(
    const BasicTensor<T>& grad_out, const Context& ctx) {
  Gradients g = backward(grad_out, ctx);
  push_kernel_.accumulate(g.grad_kernel);
  if (config_.bias) bias_.accumulate(g.grad_bias);
  return std::move(g.grad_input);
}

template <typename T>
std::size_t BasicPushPullLayer<T>::parameter_count() const {
  std::size_t n = push_kernel_.value.size();
  if (config_.bias) n += bias_.value.size();
  return n;
}

template BasicTensor<float> derive_pull(const BasicTensor<float>&, double);
template BasicTensor<double> derive_pull(const BasicTensor<double>&, double);
template BasicTensor<float> derive_pull_adjoint(const BasicTensor<float>&,
                                                std::size_t, double);
template BasicTensor<double> derive_pull_adjoint(const BasicTensor<double>&,
                                                 std::size_t, double);
template class BasicPushPullLayer<float>;
template class BasicPushPullLayer<double>;

}  // namespace pushpull
