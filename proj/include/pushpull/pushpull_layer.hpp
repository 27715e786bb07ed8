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

#ifndef PUSHPULL_PUSHPULL_LAYER_HPP_
#define PUSHPULL_PUSHPULL_LAYER_HPP_

#include <cstddef>
#include <random>
#include <vector>

#include "pushpull/ops.hpp"
#include "pushpull/optim.hpp"
#include "pushpull/tensor.hpp"

namespace pushpull {

struct PushPullConfig {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_size = 5;   // odd; the push kernel is square
  double alpha = 1.0;            // inhibition strength
  double upsample = 2.0;         // pull/push support ratio h >= 1
  std::size_t stride = 1;
  bool bias = true;

  void validate() const;
  std::size_t pull_kernel_size() const;
};

// Smallest odd integer >= round(kernel_size * h).
std::size_t pull_kernel_size(std::size_t kernel_size, double h);

// Row-major (to x from) matrix of corner-aligned bilinear weights: sample u
// of the output reads source coordinate u * (from - 1) / (to - 1).
std::vector<double> bilinear_resize_weights(std::size_t from, std::size_t to);

// Pull kernel: each (out, in) slice of the push kernel is resized to k' x k'
// with corner-aligned bilinear interpolation and negated. Linear in `push`;
// h == 1 returns exactly -push.
template <typename T>
BasicTensor<T> derive_pull(const BasicTensor<T>& push, double h);

// Adjoint of derive_pull: maps a gradient w.r.t. the pull kernel back onto
// the push kernel (shape (Cout, Cin, k, k)).
template <typename T>
BasicTensor<T> derive_pull_adjoint(const BasicTensor<T>& grad_pull,
                                   std::size_t kernel_size, double h);

// Push-pull response
//
//   P(I) = relu(k * I + b) - alpha * relu(pull(k) * I)
//
// where k is the learned push kernel, pull(k) = derive_pull(k, h) and each
// path uses its own "same" padding so both maps share the spatial shape. The
// pull kernel is rebuilt from the push kernel on every forward call and is
// never a parameter: the trainable count equals that of a conv layer with the
// same (Cin, Cout, k, bias).
template <typename T>
class BasicPushPullLayer {
 public:
  struct Context {
    BasicTensor<T> input;
    BasicTensor<T> push_pre;
    BasicTensor<T> pull_pre;
    BasicTensor<T> pull_kernel;
  };

  struct Gradients {
    BasicTensor<T> grad_input;
    BasicTensor<T> grad_kernel;
    BasicTensor<T> grad_bias;  // empty when the layer has no bias
  };

  explicit BasicPushPullLayer(PushPullConfig config);
  BasicPushPullLayer(PushPullConfig config, BasicTensor<T> push_kernel,
                     BasicTensor<T> bias = {});

  // Kaiming-normal push kernel (fan-in = Cin*k*k), zero bias.
  void initialize(std::mt19937_64& rng);

  BasicTensor<T> forward(const BasicTensor<T>& input) const;
  BasicTensor<T> forward(const BasicTensor<T>& input, Context& ctx) const;

  Gradients backward(const BasicTensor<T>& grad_out, const Context& ctx) const;

  // Runs backward and adds the kernel/bias gradients into the parameters.
  BasicTensor<T> backward_accumulate(const BasicTensor<T>& grad_out,
                                     const Context& ctx);

  const PushPullConfig& config() const { return config_; }
  BasicParameter<T>& push_kernel() { return push_kernel_; }
  const BasicParameter<T>& push_kernel() const { return push_kernel_; }
  BasicParameter<T>& bias() { return bias_; }
  const BasicParameter<T>& bias() const { return bias_; }
  bool has_bias() const { return config_.bias; }

  BasicTensor<T> pull_kernel() const;
  Conv2dGeometry push_geometry() const;
  Conv2dGeometry pull_geometry() const;

  std::size_t parameter_count() const;

 private:
  PushPullConfig config_;
  BasicParameter<T> push_kernel_;
  BasicParameter<T> bias_;
};

using PushPullLayer = BasicPushPullLayer<float>;
using PushPullLayerD = BasicPushPullLayer<double>;

}  // namespace pushpull

#endif  // PUSHPULL_PUSHPULL_LAYER_HPP_
