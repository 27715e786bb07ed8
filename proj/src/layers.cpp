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

#include "pushpull/layers.hpp"

#include <cmath>

namespace pushpull {
namespace {

Tensor kaiming_normal(Shape shape, std::size_t fan_in, WeightInit& init) {
  Tensor t(std::move(shape));
  if (!init.sample) return t;
  std::normal_distribution<double> normal(
      0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (auto& w : t.data()) w = static_cast<float>(normal(init.rng));
  return t;
}

void require_context(const Shape& saved, const char* layer) {
  if (saved.empty()) {
    fail(ErrorCode::kMissingContext,
         std::string(layer) + ": backward called before forward");
  }
}

}  // namespace

Conv2dLayer::Conv2dLayer(std::size_t in_channels, std::size_t out_channels,
                         std::size_t kernel_size, Conv2dGeometry geometry,
                         bool bias, WeightInit& init)
    : kernel_(kaiming_normal({out_channels, in_channels, kernel_size,
                              kernel_size},
                             in_channels * kernel_size * kernel_size, init)),
      has_bias_(bias),
      geometry_(geometry) {
  if (has_bias_) bias_ = Parameter(Tensor({out_channels}));
}

Tensor Conv2dLayer::forward(const Tensor& input, Mode) {
  input_ = input;
  return conv2d(input, kernel_.value,
                has_bias_ ? bias_.value.data() : std::span<const float>{},
                geometry_);
}

Tensor Conv2dLayer::backward(const Tensor& grad_out) {
  require_context(input_.shape(), "conv2d");
  auto g = conv2d_backward(grad_out, input_, kernel_.value, geometry_);
  kernel_.accumulate(g.grad_kernel);
  if (has_bias_) bias_.accumulate(g.grad_bias);
  return std::move(g.grad_input);
}

void Conv2dLayer::collect_parameters(const std::string& prefix,
                                     std::vector<NamedParameter>& out) {
  out.push_back({prefix + "weight", &kernel_});
  if (has_bias_) out.push_back({prefix + "bias", &bias_});
}

PushPullModule::PushPullModule(const PushPullConfig& config,
                               WeightInit& init)
    : layer_(config) {
  if (init.sample) layer_.initialize(init.rng);
}

Tensor PushPullModule::forward(const Tensor& input, Mode) {
  return layer_.forward(input, ctx_);
}

Tensor PushPullModule::backward(const Tensor& grad_out) {
  return layer_.backward_accumulate(grad_out, ctx_);
}

void PushPullModule::collect_parameters(const std::string& prefix,
                                        std::vector<NamedParameter>& out) {
  out.push_back({prefix + "push_weight", &layer_.push_kernel()});
  if (layer_.has_bias()) out.push_back({prefix + "bias", &layer_.bias()});
}

Tensor ReluLayer::forward(const Tensor& input, Mode) {
  input_ = input;
  return relu(input);
}

Tensor ReluLayer::backward(const Tensor& grad_out) {
  require_context(input_.shape(), "relu");
  return relu_backward(grad_out, input_);
}

Tensor MaxPoolLayer::forward(const Tensor& input, Mode) {
  input_shape_ = input.shape();
  auto r = maxpool2d(input, window_, stride_);
  argmax_ = std::move(r.argmax);
  return std::move(r.output);
}

Tensor MaxPoolLayer::backward(const Tensor& grad_out) {
  require_context(input_shape_, "maxpool2d");
  return maxpool2d_backward(grad_out, std::span<const std::size_t>(argmax_),
                            input_shape_);
}

Tensor FlattenLayer::forward(const Tensor& input, Mode) {
  input_shape_ = input.shape();
  const std::size_t b = input.dim(0);
  return input.reshaped({b, input.size() / b});
}

Tensor FlattenLayer::backward(const Tensor& grad_out) {
  require_context(input_shape_, "flatten");
  return grad_out.reshaped(input_shape_);
}

LinearLayer::LinearLayer(std::size_t in_features, std::size_t out_features,
                         WeightInit& init)
    : bias_(Tensor({out_features})) {
  Tensor w({out_features, in_features});
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_features));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  if (init.sample) {
    for (auto& v : w.data()) v = static_cast<float>(uniform(init.rng));
  }
  weight_ = Parameter(std::move(w));
}

Tensor LinearLayer::forward(const Tensor& input, Mode) {
  input_ = input;
  return linear(input, weight_.value, bias_.value);
}

Tensor LinearLayer::backward(const Tensor& grad_out) {
  require_context(input_.shape(), "linear");
  auto g = linear_backward(grad_out, input_, weight_.value);
  weight_.accumulate(g.grad_weight);
  bias_.accumulate(g.grad_bias);
  return std::move(g.grad_input);
}

void LinearLayer::collect_parameters(const std::string& prefix,
                                     std::vector<NamedParameter>& out) {
  out.push_back({prefix + "weight", &weight_});
  out.push_back({prefix + "bias", &bias_});
}

BatchNormLayer::BatchNormLayer(std::size_t channels)
    : gamma_(Tensor({channels}, 1.0f)),
      beta_(Tensor({channels})),
      running_mean_({channels}),
      running_var_({channels}, 1.0f) {}

Tensor BatchNormLayer::forward(const Tensor& input, Mode mode) {
  if (mode == Mode::kTrain) {
    return batchnorm2d_train(input, gamma_.value, beta_.value, running_mean_,
                             running_var_, kMomentum, kEpsilon, ctx_);
  }
  return batchnorm2d_eval(input, gamma_.value, beta_.value, running_mean_,
                          running_var_, kEpsilon);
}

Tensor BatchNormLayer::backward(const Tensor& grad_out) {
  auto g = batchnorm2d_backward(grad_out, gamma_.value, ctx_);
  gamma_.accumulate(g.grad_gamma);
  beta_.accumulate(g.grad_beta);
  return std::move(g.grad_input);
}

void BatchNormLayer::collect_parameters(const std::string& prefix,
                                        std::vector<NamedParameter>& out) {
  out.push_back({prefix + "gamma", &gamma_});
  out.push_back({prefix + "beta", &beta_});
}

void BatchNormLayer::collect_buffers(const std::string& prefix,
                                     std::vector<NamedBuffer>& out) {
  out.push_back({prefix + "running_mean", &running_mean_});
  out.push_back({prefix + "running_var", &running_var_});
}

Tensor GlobalAvgPoolLayer::forward(const Tensor& input, Mode) {
  input_shape_ = input.shape();
  return global_avgpool(input);
}

Tensor GlobalAvgPoolLayer::backward(const Tensor& grad_out) {
  require_context(input_shape_, "global_avgpool");
  return global_avgpool_backward(grad_out, input_shape_);
}

BasicBlock::BasicBlock(std::size_t in_channels, std::size_t out_channels,
                       std::size_t stride, WeightInit& init)
    : bn1_(in_channels),
      conv1_(in_channels, out_channels, 3, Conv2dGeometry::same(3, stride),
             false, init),
      bn2_(out_channels),
      conv2_(out_channels, out_channels, 3, Conv2dGeometry::same(3), false,
             init) {
  if (in_channels != out_channels || stride != 1) {
    shortcut_ = std::make_unique<Conv2dLayer>(
        in_channels, out_channels, 1, Conv2dGeometry{0, 0, stride, stride},
        false, init);
  }
}

Tensor BasicBlock::forward(const Tensor& input, Mode mode) {
  Tensor o = relu1_.forward(bn1_.forward(input, mode), mode);
  Tensor y = conv1_.forward(o, mode);
  y = conv2_.forward(relu2_.forward(bn2_.forward(y, mode), mode), mode);
  if (shortcut_) return add(y, shortcut_->forward(o, mode));
  return add(y, input);
}

Tensor BasicBlock::backward(const Tensor& grad_out) {
  Tensor g = conv2_.backward(grad_out);
  g = bn2_.backward(relu2_.backward(g));
  Tensor grad_o = conv1_.backward(g);
  if (shortcut_) {
    add_inplace(grad_o, shortcut_->backward(grad_out));
    return bn1_.backward(relu1_.backward(grad_o));
  }
  Tensor grad_in = bn1_.backward(relu1_.backward(grad_o));
  add_inplace(grad_in, grad_out);
  return grad_in;
}

void BasicBlock::collect_parameters(const std::string& prefix,
                                    std::vector<NamedParameter>& out) {
  bn1_.collect_parameters(prefix + "bn1.", out);
  conv1_.collect_parameters(prefix + "conv1.", out);
  bn2_.collect_parameters(prefix + "bn2.", out);
  conv2_.collect_parameters(prefix + "conv2.", out);
  if (shortcut_) shortcut_->collect_parameters(prefix + "shortcut.", out);
}

void BasicBlock::collect_buffers(const std::string& prefix,
                                 std::vector<NamedBuffer>& out) {
  bn1_.collect_buffers(prefix + "bn1.", out);
  bn2_.collect_buffers(prefix + "bn2.", out);
}

}  // namespace pushpull
