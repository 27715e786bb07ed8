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

#ifndef PUSHPULL_LAYERS_HPP_
#define PUSHPULL_LAYERS_HPP_

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "pushpull/ops.hpp"
#include "pushpull/optim.hpp"
#include "pushpull/pushpull_layer.hpp"

namespace pushpull {

enum class Mode { kTrain, kEval };

// Weight initialization source for layer constructors. With sample == false
// randomly drawn weights stay zero.
struct WeightInit {
  explicit WeightInit(std::uint64_t seed, bool sample = true)
      : rng(seed), sample(sample) {}

  std::mt19937_64 rng;
  bool sample;
};

struct NamedParameter {
  std::string name;
  Parameter* param;
};

// Non-trainable state that still belongs in a checkpoint (batch-norm
// running statistics).
struct NamedBuffer {
  std::string name;
  Tensor* tensor;
};

// A model stage. forward() caches whatever backward() needs; backward()
// accumulates parameter gradients and returns the input gradient.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual Tensor forward(const Tensor& input, Mode mode) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::string kind() const = 0;

  virtual void collect_parameters(const std::string& prefix,
                                  std::vector<NamedParameter>& out) {
    (void)prefix;
    (void)out;
  }
  virtual void collect_buffers(const std::string& prefix,
                               std::vector<NamedBuffer>& out) {
    (void)prefix;
    (void)out;
  }
};

using LayerPtr = std::unique_ptr<Layer>;

class Conv2dLayer : public Layer {
 public:
  Conv2dLayer(std::size_t in_channels, std::size_t out_channels,
              std::size_t kernel_size, Conv2dGeometry geometry, bool bias,
              WeightInit& init);

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "conv2d"; }
  void collect_parameters(const std::string& prefix,
                          std::vector<NamedParameter>& out) override;

  Parameter& kernel() { return kernel_; }

 private:
  Parameter kernel_;
  Parameter bias_;
  bool has_bias_;
  Conv2dGeometry geometry_;
  Tensor input_;
};

class PushPullModule : public Layer {
 public:
  PushPullModule(const PushPullConfig& config, WeightInit& init);

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "pushpull"; }
  void collect_parameters(const std::string& prefix,
                          std::vector<NamedParameter>& out) override;

  PushPullLayer& layer() { return layer_; }

 private:
  PushPullLayer layer_;
  PushPullLayer::Context ctx_;
};

class ReluLayer : public Layer {
 public:
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "relu"; }

 private:
  Tensor input_;
};

class MaxPoolLayer : public Layer {
 public:
  MaxPoolLayer(std::size_t window, std::size_t stride)
      : window_(window), stride_(stride) {}

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "maxpool2d"; }

 private:
  std::size_t window_;
  std::size_t stride_;
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
};

class FlattenLayer : public Layer {
 public:
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "flatten"; }

 private:
  Shape input_shape_;
};

class LinearLayer : public Layer {
 public:
  LinearLayer(std::size_t in_features, std::size_t out_features,
              WeightInit& init);

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "linear"; }
  void collect_parameters(const std::string& prefix,
                          std::vector<NamedParameter>& out) override;

 private:
  Parameter weight_;
  Parameter bias_;
  Tensor input_;
};

class BatchNormLayer : public Layer {
 public:
  static constexpr float kMomentum = 0.9f;
  static constexpr float kEpsilon = 1e-5f;

  explicit BatchNormLayer(std::size_t channels);

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "batchnorm2d"; }
  void collect_parameters(const std::string& prefix,
                          std::vector<NamedParameter>& out) override;
  void collect_buffers(const std::string& prefix,
                       std::vector<NamedBuffer>& out) override;

 private:
  Parameter gamma_;
  Parameter beta_;
  Tensor running_mean_;
  Tensor running_var_;
  BatchNormContext<float> ctx_;
};

class GlobalAvgPoolLayer : public Layer {
 public:
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "global_avgpool"; }

 private:
  Shape input_shape_;
};

// Pre-activation wide-residual basic block:
//   o = relu(bn1(x)); y = conv2(relu(bn2(conv1(o)))); out = y + shortcut
// where shortcut is x when the shape is preserved and a strided 1x1
// convolution of o otherwise.
class BasicBlock : public Layer {
 public:
  BasicBlock(std::size_t in_channels, std::size_t out_channels,
             std::size_t stride, WeightInit& init);

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "basic_block"; }
  void collect_parameters(const std::string& prefix,
                          std::vector<NamedParameter>& out) override;
  void collect_buffers(const std::string& prefix,
                       std::vector<NamedBuffer>& out) override;

 private:
  BatchNormLayer bn1_;
  ReluLayer relu1_;
  Conv2dLayer conv1_;
  BatchNormLayer bn2_;
  ReluLayer relu2_;
  Conv2dLayer conv2_;
  std::unique_ptr<Conv2dLayer> shortcut_;
};

}  // namespace pushpull

#endif  // PUSHPULL_LAYERS_HPP_
