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

#include "pushpull/model.hpp"

#include <algorithm>
#include <random>

namespace pushpull {

std::string_view to_string(ModelFamily family) {
  return family == ModelFamily::kLeNet5 ? "lenet5" : "wideresnet";
}

std::string_view to_string(FirstLayer first) {
  return first == FirstLayer::kConv ? "conv" : "pushpull";
}

ModelFamily parse_model_family(std::string_view s) {
  if (s == "lenet5") return ModelFamily::kLeNet5;
  if (s == "wideresnet") return ModelFamily::kWideResNet;
  fail(ErrorCode::kInvalidArgument,
       "unknown model family '" + std::string(s) + "'");
}

FirstLayer parse_first_layer(std::string_view s) {
  if (s == "conv") return FirstLayer::kConv;
  if (s == "pushpull") return FirstLayer::kPushPull;
  fail(ErrorCode::kInvalidArgument,
       "unknown first layer '" + std::string(s) + "'");
}

void ModelSpec::validate() const {
  if (num_classes == 0) {
    fail(ErrorCode::kInvalidArgument, "model spec: num_classes must be > 0");
  }
  if (std::any_of(input_shape.begin(), input_shape.end(),
                  [](std::size_t d) { return d == 0; })) {
    fail(ErrorCode::kInvalidArgument, "model spec: input shape has a zero");
  }
  if (family == ModelFamily::kLeNet5) {
    if (conv1_channels == 0 || conv2_channels == 0) {
      fail(ErrorCode::kInvalidArgument,
           "model spec: lenet conv channels must be positive");
    }
    if (fc_widths.empty() || fc_widths.back() != num_classes) {
      fail(ErrorCode::kInvalidArgument,
           "model spec: lenet fc widths must end in num_classes (" +
               std::to_string(num_classes) + ")");
    }
    if (std::find(fc_widths.begin(), fc_widths.end(), 0u) != fc_widths.end()) {
      fail(ErrorCode::kInvalidArgument, "model spec: fc width of zero");
    }
  } else {
    if (depth < 10 || (depth - 4) % 6 != 0) {
      fail(ErrorCode::kInvalidArgument,
           "model spec: wideresnet depth " + std::to_string(depth) +
               " violates (depth - 4) % 6 == 0");
    }
    if (widen == 0) {
      fail(ErrorCode::kInvalidArgument, "model spec: widen factor must be > 0");
    }
  }
  if (first_layer == FirstLayer::kPushPull) first_pushpull_config().validate();
}

ModelSpec ModelSpec::with_first_layer(FirstLayer first) const {
  ModelSpec s = *this;
  s.first_layer = first;
  if (s.family == ModelFamily::kLeNet5) {
    if (first != first_layer && !s.name.empty()) {
      s.name = first == FirstLayer::kPushPull ? "P" + s.name : s.name.substr(1);
    }
  } else {
    s.name = "WRN-" + std::to_string(depth) + "-" + std::to_string(widen) +
             (first == FirstLayer::kPushPull ? "-PP" : "");
  }
  return s;
}

PushPullConfig ModelSpec::first_pushpull_config() const {
  PushPullConfig c;
  c.in_channels = input_shape[0];
  c.alpha = pushpull_alpha;
  c.upsample = pushpull_upsample;
  c.stride = 1;
  if (family == ModelFamily::kLeNet5) {
    c.out_channels = conv1_channels;
    c.kernel_size = 5;
    c.bias = true;
  } else {
    c.out_channels = 16;
    c.kernel_size = 3;
    c.bias = false;
  }
  return c;
}

ModelSpec lenet_preset(std::string_view name) {
  std::string_view base = name;
  ModelSpec s;
  s.family = ModelFamily::kLeNet5;
  s.first_layer = FirstLayer::kConv;
  if (base.size() == 2 && base[0] == 'P') {
    s.first_layer = FirstLayer::kPushPull;
    base = base.substr(1);
  }
  if (base == "A") {
    s.conv1_channels = 6, s.conv2_channels = 16, s.fc_widths = {128, 64, 10};
  } else if (base == "B") {
    s.conv1_channels = 6, s.conv2_channels = 8, s.fc_widths = {64, 32, 10};
  } else if (base == "C") {
    s.conv1_channels = 4, s.conv2_channels = 16, s.fc_widths = {128, 64, 10};
  } else if (base == "D") {
    s.conv1_channels = 4, s.conv2_channels = 8, s.fc_widths = {64, 32, 10};
  } else {
    fail(ErrorCode::kInvalidArgument,
         "unknown LeNet-5 configuration '" + std::string(name) +
             "' (expected A-D or PA-PD)");
  }
  s.name = std::string(name);
  return s;
}

std::vector<std::string> lenet_preset_names() {
  return {"A", "B", "C", "D", "PA", "PB", "PC", "PD"};
}

ModelSpec wideresnet_spec(std::size_t depth, std::size_t widen, bool pushpull,
                          std::size_t num_classes,
                          std::array<std::size_t, 3> input_shape) {
  ModelSpec s;
  s.family = ModelFamily::kWideResNet;
  s.first_layer = pushpull ? FirstLayer::kPushPull : FirstLayer::kConv;
  s.depth = depth;
  s.widen = widen;
  s.num_classes = num_classes;
  s.input_shape = input_shape;
  s.fc_widths.clear();
  s.name = "WRN-" + std::to_string(depth) + "-" + std::to_string(widen) +
           (pushpull ? "-PP" : "");
  s.validate();
  return s;
}

Model::Model(ModelSpec spec, std::vector<std::string> names,
             std::vector<LayerPtr> layers)
    : spec_(std::move(spec)),
      names_(std::move(names)),
      layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->collect_parameters(names_[i] + ".", params_);
    layers_[i]->collect_buffers(names_[i] + ".", buffers_);
  }
}

Tensor Model::forward(const Tensor& input, Mode mode) {
  const auto& s = spec_.input_shape;
  if (input.rank() != 4 || input.dim(1) != s[0] || input.dim(2) != s[1] ||
      input.dim(3) != s[2]) {
    fail(ErrorCode::kShapeMismatch,
         "model " + spec_.name + ": expected input (B," +
             std::to_string(s[0]) + "," + std::to_string(s[1]) + "," +
             std::to_string(s[2]) + "), got " + shape_str(input.shape()));
  }
  Tensor x = input;
  for (auto& layer : layers_) x = layer->forward(x, mode);
  return x;
}

Tensor Model::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = (*it)->backward(g);
  }
  return g;
}

std::vector<Parameter*> Model::parameter_ptrs() const {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.param);
  return out;
}

void Model::zero_grad() {
  for (auto& p : params_) p.param->zero_grad();
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (p.param->trainable) n += p.param->value.size();
  }
  return n;
}

PushPullLayer* Model::pushpull_layer() {
  if (layers_.empty()) return nullptr;
  auto* pp = dynamic_cast<PushPullModule*>(layers_.front().get());
  return pp ? &pp->layer() : nullptr;
}

namespace {

class LayerList {
 public:
  void add(std::string name, LayerPtr layer) {
    names_.push_back(std::move(name));
    layers_.push_back(std::move(layer));
  }
  Model finish(const ModelSpec& spec) {
    return Model(spec, std::move(names_), std::move(layers_));
  }

 private:
  std::vector<std::string> names_;
  std::vector<LayerPtr> layers_;
};

}  // namespace

Model build_lenet(const ModelSpec& spec, std::uint64_t seed, Init init) {
  if (spec.family != ModelFamily::kLeNet5) {
    fail(ErrorCode::kInvalidArgument, "build_lenet: spec is not lenet5");
  }
  spec.validate();
  WeightInit weights(seed, init == Init::kRandom);
  const auto [in_c, in_h, in_w] = spec.input_shape;
  constexpr std::size_t k = 5;

  // Spatial extents after: same conv, pool, valid conv, pool.
  auto after = [](std::size_t d) -> std::size_t {
    d /= 2;
    if (d < k) return 0;
    return (d - k + 1) / 2;
  };
  const std::size_t fh = after(in_h), fw = after(in_w);
  if (fh == 0 || fw == 0) {
    fail(ErrorCode::kInvalidArgument,
         "build_lenet: input " + std::to_string(in_h) + "x" +
             std::to_string(in_w) + " too small for LeNet-5");
  }

  LayerList net;
  if (spec.first_layer == FirstLayer::kPushPull) {
    net.add("conv1", std::make_unique<PushPullModule>(
                         spec.first_pushpull_config(), weights));
  } else {
    net.add("conv1", std::make_unique<Conv2dLayer>(
                         in_c, spec.conv1_channels, k,
                         Conv2dGeometry::same(k), true, weights));
    net.add("relu1", std::make_unique<ReluLayer>());
  }
  net.add("pool1", std::make_unique<MaxPoolLayer>(2, 2));
  net.add("conv2", std::make_unique<Conv2dLayer>(spec.conv1_channels,
                                                 spec.conv2_channels, k,
                                                 Conv2dGeometry{}, true, weights));
  net.add("relu2", std::make_unique<ReluLayer>());
  net.add("pool2", std::make_unique<MaxPoolLayer>(2, 2));
  net.add("flatten", std::make_unique<FlattenLayer>());
  std::size_t features = spec.conv2_channels * fh * fw;
  for (std::size_t i = 0; i < spec.fc_widths.size(); ++i) {
    const std::string idx = std::to_string(i + 1);
    net.add("fc" + idx,
            std::make_unique<LinearLayer>(features, spec.fc_widths[i], weights));
    if (i + 1 < spec.fc_widths.size()) {
      net.add("relu_fc" + idx, std::make_unique<ReluLayer>());
    }
    features = spec.fc_widths[i];
  }
  return net.finish(spec);
}

Model build_wideresnet(const ModelSpec& spec, std::uint64_t seed, Init init) {
  if (spec.family != ModelFamily::kWideResNet) {
    fail(ErrorCode::kInvalidArgument, "build_wideresnet: spec is not wideresnet");
  }
  spec.validate();
  WeightInit weights(seed, init == Init::kRandom);
  const std::size_t blocks = (spec.depth - 4) / 6;
  const std::size_t widths[3] = {16 * spec.widen, 32 * spec.widen,
                                 64 * spec.widen};

  LayerList net;
  if (spec.first_layer == FirstLayer::kPushPull) {
    net.add("conv1", std::make_unique<PushPullModule>(
                         spec.first_pushpull_config(), weights));
  } else {
    net.add("conv1",
            std::make_unique<Conv2dLayer>(spec.input_shape[0], 16, 3,
                                          Conv2dGeometry::same(3), false, weights));
  }
  std::size_t channels = 16;
  for (std::size_t group = 0; group < 3; ++group) {
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t stride = (group > 0 && b == 0) ? 2 : 1;
      net.add("group" + std::to_string(group + 1) + ".block" +
                  std::to_string(b + 1),
              std::make_unique<BasicBlock>(channels, widths[group], stride,
                                           weights));
      channels = widths[group];
    }
  }
  net.add("bn", std::make_unique<BatchNormLayer>(channels));
  net.add("relu", std::make_unique<ReluLayer>());
  net.add("pool", std::make_unique<GlobalAvgPoolLayer>());
  net.add("fc", std::make_unique<LinearLayer>(channels, spec.num_classes, weights));
  return net.finish(spec);
}

Model build_model(const ModelSpec& spec, std::uint64_t seed, Init init) {
  return spec.family == ModelFamily::kLeNet5 ? build_lenet(spec, seed, init)
                                             : build_wideresnet(spec, seed, init);
}

std::size_t parameter_count(const Model& model) {
  return model.parameter_count();
}

}  // namespace pushpull
