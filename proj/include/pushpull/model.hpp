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

#ifndef PUSHPULL_MODEL_HPP_
#define PUSHPULL_MODEL_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pushpull/layers.hpp"
#include "pushpull/pushpull_layer.hpp"

namespace pushpull {

enum class ModelFamily { kLeNet5, kWideResNet };
enum class FirstLayer { kConv, kPushPull };

std::string_view to_string(ModelFamily family);
std::string_view to_string(FirstLayer first);
ModelFamily parse_model_family(std::string_view s);
FirstLayer parse_first_layer(std::string_view s);

// Declarative network description.
struct ModelSpec {
  std::string name;
  ModelFamily family = ModelFamily::kLeNet5;
  FirstLayer first_layer = FirstLayer::kConv;

  // LeNet-5 only.
  std::size_t conv1_channels = 6;
  std::size_t conv2_channels = 16;
  std::vector<std::size_t> fc_widths{128, 64, 10};

  // WideResNet only.
  std::size_t depth = 16;
  std::size_t widen = 1;

  // Only alpha and upsample are read; channel counts and kernel size are
  // fixed by the layer being replaced.
  double pushpull_alpha = 1.0;
  double pushpull_upsample = 2.0;

  std::size_t num_classes = 10;
  std::array<std::size_t, 3> input_shape{1, 28, 28};

  void validate() const;

  // Same spec with the first layer swapped (the parity counterpart).
  ModelSpec with_first_layer(FirstLayer first) const;

  // The push-pull configuration the builder installs as the first layer.
  PushPullConfig first_pushpull_config() const;
};

// The eight LeNet-5 configurations: A, B, C, D (convolutional first layer)
// and PA, PB, PC, PD (push-pull first layer).
ModelSpec lenet_preset(std::string_view name);
std::vector<std::string> lenet_preset_names();

// WRN-depth-widen, optionally with a push-pull first layer ("-PP").
ModelSpec wideresnet_spec(std::size_t depth, std::size_t widen, bool pushpull,
                          std::size_t num_classes = 10,
                          std::array<std::size_t, 3> input_shape = {3, 32, 32});

class Model {
 public:
  Model(ModelSpec spec, std::vector<std::string> names,
        std::vector<LayerPtr> layers);

  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  Tensor forward(const Tensor& input, Mode mode);
  Tensor backward(const Tensor& grad_out);

  const ModelSpec& spec() const { return spec_; }
  const std::vector<NamedParameter>& parameters() const { return params_; }
  const std::vector<NamedBuffer>& buffers() const { return buffers_; }
  std::vector<Parameter*> parameter_ptrs() const;

  void zero_grad();
  std::size_t parameter_count() const;

  // The push-pull first layer, or nullptr for a convolutional first layer.
  PushPullLayer* pushpull_layer();

  std::size_t layer_count() const { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

 private:
  ModelSpec spec_;
  std::vector<std::string> names_;
  std::vector<LayerPtr> layers_;
  std::vector<NamedParameter> params_;
  std::vector<NamedBuffer> buffers_;
};

// kZero skips random sampling: weights that would be drawn stay zero, fixed
// initial values (batch-norm scale 1, zero biases) are unchanged. Structure
// and parameter counts are exact.
enum class Init { kRandom, kZero };

// first layer (5x5, same padding) -> [relu] -> maxpool 2x2 -> conv 5x5 ->
// relu -> maxpool 2x2 -> flatten -> fc chain with relu between layers.
Model build_lenet(const ModelSpec& spec, std::uint64_t seed,
                  Init init = Init::kRandom);

// conv 3x3 (16) -> 3 groups of (depth-4)/6 basic blocks at 16W/32W/64W ->
// batch-norm -> relu -> global average pool -> fc.
Model build_wideresnet(const ModelSpec& spec, std::uint64_t seed,
                       Init init = Init::kRandom);

Model build_model(const ModelSpec& spec, std::uint64_t seed,
                  Init init = Init::kRandom);

std::size_t parameter_count(const Model& model);

}  // namespace pushpull

#endif  // PUSHPULL_MODEL_HPP_
