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

#ifndef PUSHPULL_CHECKPOINT_HPP_
#define PUSHPULL_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pushpull/data.hpp"
#include "pushpull/model.hpp"

namespace pushpull {

// Binary container, little-endian throughout:
//
//   "PPCKPT\0\0"            8 bytes
//   format version          u32
//   metadata length, bytes  u32, then UTF-8 JSON (spec, seed, normalization)
//   tensor count            u32
//   per tensor: name length u32, name, dtype u8 (1 = f32), role u8
//               (0 = parameter, 1 = buffer), rank u32, dims u64 x rank,
//               values f32 x numel
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  struct Entry {
    std::string name;
    bool is_buffer = false;
    Tensor value;
  };

  ModelSpec spec;
  std::uint64_t seed = 0;
  std::string dataset;
  Normalization normalization;
  int epochs_completed = 0;
  std::vector<Entry> tensors;
};

Checkpoint make_checkpoint(const Model& model, std::uint64_t seed,
                           const std::string& dataset,
                           const Normalization& normalization,
                           int epochs_completed);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Builds the checkpoint's model and copies every stored tensor into it.
Model restore_model(const Checkpoint& ckpt);

}  // namespace pushpull

#endif  // PUSHPULL_CHECKPOINT_HPP_
