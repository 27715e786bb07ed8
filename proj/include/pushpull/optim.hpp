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

#ifndef PUSHPULL_OPTIM_HPP_
#define PUSHPULL_OPTIM_HPP_

#include <span>
#include <utility>
#include <vector>

#include "pushpull/tensor.hpp"

namespace pushpull {

// A learnable tensor with its accumulated gradient.
template <typename T>
struct BasicParameter {
  BasicTensor<T> value;
  BasicTensor<T> gradient;
  bool trainable = true;

  BasicParameter() = default;
  explicit BasicParameter(BasicTensor<T> v, bool is_trainable = true)
      : value(std::move(v)),
        gradient(value.shape()),
        trainable(is_trainable) {}

  void zero_grad() { gradient = BasicTensor<T>(value.shape()); }

  // Adds into the gradient; the shape must match the value.
  void accumulate(const BasicTensor<T>& grad);
};

using Parameter = BasicParameter<float>;
using ParameterD = BasicParameter<double>;

struct SgdConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 0.0;
  // (epoch, multiplier): the multiplier applies from that epoch onward.
  std::vector<std::pair<int, double>> schedule;

  void validate() const;
  double rate_at(int epoch) const;
};

// SGD with heavy-ball momentum:
//   v <- momentum * v + (g + weight_decay * w);  w <- w - lr * v
// Velocity buffers are indexed by position in the parameter list, which must
// stay the same between calls.
class Sgd {
 public:
  explicit Sgd(SgdConfig config);

  void step(std::span<Parameter* const> params, int epoch = 0);

  const SgdConfig& config() const { return config_; }

 private:
  SgdConfig config_;
  std::vector<std::vector<float>> velocity_;
};

// One stateless update (no momentum carried across calls).
void sgd_step(std::span<Parameter* const> params, const SgdConfig& config);

}  // namespace pushpull

#endif  // PUSHPULL_OPTIM_HPP_
