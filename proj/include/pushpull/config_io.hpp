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

#ifndef PUSHPULL_CONFIG_IO_HPP_
#define PUSHPULL_CONFIG_IO_HPP_

#include "json.hpp"
#include "pushpull/data.hpp"
#include "pushpull/model.hpp"
#include "pushpull/optim.hpp"
#include "pushpull/perturb.hpp"

// JSON adapters for the structured config file and checkpoint metadata.
namespace pushpull {

using Json = nlohmann::json;

// A model object may be either a full description or {"preset": "PB"},
// {"preset": "WRN-16-1-PP"}; explicit keys override the preset.
void to_json(Json& j, const ModelSpec& spec);
void from_json(const Json& j, ModelSpec& spec);

void to_json(Json& j, const SgdConfig& config);
void from_json(const Json& j, SgdConfig& config);

void to_json(Json& j, const Normalization& norm);
void from_json(const Json& j, Normalization& norm);

void to_json(Json& j, const PerturbationSpec& spec);
void from_json(const Json& j, PerturbationSpec& spec);

// "A".."PD" or "WRN-<depth>-<widen>[-PP]".
ModelSpec model_preset(std::string_view name);

}  // namespace pushpull

#endif  // PUSHPULL_CONFIG_IO_HPP_
