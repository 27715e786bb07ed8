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

#include "pushpull/config_io.hpp"

#include <charconv>

namespace pushpull {
namespace {

std::size_t parse_size(std::string_view s, std::string_view whole) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(ErrorCode::kInvalidArgument,
         "unknown model preset '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

ModelSpec model_preset(std::string_view name) {
  if (name.rfind("WRN-", 0) != 0) return lenet_preset(name);
  std::string_view rest = name.substr(4);
  bool pushpull = false;
  if (rest.size() > 3 && rest.substr(rest.size() - 3) == "-PP") {
    pushpull = true;
    rest.remove_suffix(3);
  }
  const auto dash = rest.find('-');
  if (dash == std::string_view::npos) {
    fail(ErrorCode::kInvalidArgument,
         "unknown model preset '" + std::string(name) + "'");
  }
  return wideresnet_spec(parse_size(rest.substr(0, dash), name),
                         parse_size(rest.substr(dash + 1), name), pushpull);
}

void to_json(Json& j, const ModelSpec& s) {
  j = Json{{"name", s.name},
           {"family", std::string(to_string(s.family))},
           {"first_layer", std::string(to_string(s.first_layer))},
           {"num_classes", s.num_classes},
           {"input_shape", s.input_shape}};
  if (s.family == ModelFamily::kLeNet5) {
    j["conv1_channels"] = s.conv1_channels;
    j["conv2_channels"] = s.conv2_channels;
    j["fc_widths"] = s.fc_widths;
  } else {
    j["depth"] = s.depth;
    j["widen"] = s.widen;
  }
  if (s.first_layer == FirstLayer::kPushPull) {
    j["pushpull"] = Json{{"alpha", s.pushpull_alpha},
                         {"upsample", s.pushpull_upsample}};
  }
}

void from_json(const Json& j, ModelSpec& s) {
  if (j.contains("preset")) {
    s = model_preset(j.at("preset").get<std::string>());
  }
  if (j.contains("family")) {
    s.family = parse_model_family(j.at("family").get<std::string>());
  }
  if (j.contains("first_layer")) {
    s.first_layer = parse_first_layer(j.at("first_layer").get<std::string>());
  }
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  if (j.contains("num_classes")) s.num_classes = j.at("num_classes");
  if (j.contains("input_shape")) s.input_shape = j.at("input_shape");
  if (j.contains("conv1_channels")) s.conv1_channels = j.at("conv1_channels");
  if (j.contains("conv2_channels")) s.conv2_channels = j.at("conv2_channels");
  if (j.contains("fc_widths")) {
    s.fc_widths = j.at("fc_widths").get<std::vector<std::size_t>>();
  }
  if (j.contains("depth")) s.depth = j.at("depth");
  if (j.contains("widen")) s.widen = j.at("widen");
  if (j.contains("pushpull")) {
    const Json& pp = j.at("pushpull");
    if (pp.contains("alpha")) s.pushpull_alpha = pp.at("alpha");
    if (pp.contains("upsample")) s.pushpull_upsample = pp.at("upsample");
  }
  s.validate();
}

void to_json(Json& j, const SgdConfig& c) {
  j = Json{{"learning_rate", c.learning_rate},
           {"momentum", c.momentum},
           {"weight_decay", c.weight_decay},
           {"schedule", Json::array()}};
  for (const auto& [epoch, mult] : c.schedule) {
    j["schedule"].push_back(Json::array({epoch, mult}));
  }
}

void from_json(const Json& j, SgdConfig& c) {
  if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate");
  if (j.contains("momentum")) c.momentum = j.at("momentum");
  if (j.contains("weight_decay")) c.weight_decay = j.at("weight_decay");
  if (j.contains("schedule")) {
    c.schedule.clear();
    for (const auto& e : j.at("schedule")) {
      c.schedule.emplace_back(e.at(0).get<int>(), e.at(1).get<double>());
    }
  }
  c.validate();
}

void to_json(Json& j, const Normalization& n) {
  j = Json{{"mean", n.mean}, {"std", n.std}};
}

void from_json(const Json& j, Normalization& n) {
  n.mean = j.at("mean").get<std::vector<double>>();
  n.std = j.at("std").get<std::vector<double>>();
  if (n.mean.size() != n.std.size()) {
    fail(ErrorCode::kFormat, "normalization: mean and std lengths differ");
  }
}

void to_json(Json& j, const PerturbationSpec& s) {
  j = Json{{"kind", std::string(to_string(s.kind))},
           {"param", s.parameter()},
           {"seed", s.seed}};
  if (s.kind == PerturbationKind::kPoissonAfterContrast) {
    j["peak"] = s.poisson_peak;
  }
}

void from_json(const Json& j, PerturbationSpec& s) {
  s = PerturbationSpec{};
  s.kind = parse_perturbation_kind(j.at("kind").get<std::string>());
  const double p = j.value("param", 0.0);
  if (s.kind == PerturbationKind::kGaussian ||
      s.kind == PerturbationKind::kSpeckle) {
    s.variance = p;
  } else if (s.kind != PerturbationKind::kNone) {
    s.contrast = p;
  }
  s.seed = j.value("seed", std::uint64_t{0});
  s.poisson_peak = j.value("peak", 255);
  s.validate();
}

}  // namespace pushpull
