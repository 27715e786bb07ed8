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

#include "pushpull/optim.hpp"

#include <algorithm>
#include <string>

namespace pushpull {

template <typename T>
void BasicParameter<T>::accumulate(const BasicTensor<T>& grad) {
  if (grad.shape() != value.shape()) {
    fail(ErrorCode::kShapeMismatch, "parameter gradient " +
                                        shape_str(grad.shape()) +
                                        " for value " + shape_str(value.shape()));
  }
  if (gradient.shape() != value.shape()) gradient = BasicTensor<T>(value.shape());
  for (std::size_t i = 0; i < grad.size(); ++i) gradient[i] += grad[i];
}

template struct BasicParameter<float>;
template struct BasicParameter<double>;

void SgdConfig::validate() const {
  if (!(learning_rate > 0)) {
    fail(ErrorCode::kInvalidArgument,
         "sgd: learning rate must be > 0, got " + std::to_string(learning_rate));
  }
  if (momentum < 0 || momentum >= 1) {
    fail(ErrorCode::kInvalidArgument,
         "sgd: momentum must be in [0,1), got " + std::to_string(momentum));
  }
  if (weight_decay < 0) {
    fail(ErrorCode::kInvalidArgument, "sgd: weight decay must be >= 0, got " +
                                          std::to_string(weight_decay));
  }
}

double SgdConfig::rate_at(int epoch) const {
  double mult = 1.0;
  int best = -1;
  for (const auto& [e, m] : schedule) {
    if (e <= epoch && e >= best) {
      best = e;
      mult = m;
    }
  }
  return learning_rate * mult;
}

Sgd::Sgd(SgdConfig config) : config_(std::move(config)) { config_.validate(); }

void Sgd::step(std::span<Parameter* const> params, int epoch) {
  if (velocity_.empty()) {
    velocity_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      velocity_[i].assign(params[i]->value.size(), 0.0f);
    }
  }
  if (velocity_.size() != params.size()) {
    fail(ErrorCode::kShapeMismatch,
         "sgd: parameter list changed size between steps (" +
             std::to_string(velocity_.size()) + " -> " +
             std::to_string(params.size()) + ")");
  }
  const auto lr = static_cast<float>(config_.rate_at(epoch));
  const auto mu = static_cast<float>(config_.momentum);
  const auto wd = static_cast<float>(config_.weight_decay);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    if (!p.trainable) continue;
    auto& v = velocity_[i];
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const float g = p.gradient[j] + wd * p.value[j];
      v[j] = mu * v[j] + g;
      p.value[j] -= lr * v[j];
    }
  }
}

void sgd_step(std::span<Parameter* const> params, const SgdConfig& config) {
  SgdConfig plain = config;
  plain.momentum = 0;
  Sgd(plain).step(params);
}

}  // namespace pushpull
