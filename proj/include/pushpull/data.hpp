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

#ifndef PUSHPULL_DATA_HPP_
#define PUSHPULL_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pushpull/tensor.hpp"

namespace pushpull {

struct Dataset {
  Tensor images;  // (N, C, H, W), values in [0, 1] until normalized
  std::vector<int> labels;
  std::string name;
  std::size_t class_count = 0;
  bool normalized = false;

  std::size_t size() const { return labels.size(); }
  Shape image_shape() const;

  // Images [begin, begin + count) as a (count, C, H, W) tensor.
  Tensor batch(std::size_t begin, std::size_t count) const;
  Tensor batch(const std::vector<std::size_t>& indices) const;

  void validate() const;
};

// Big-endian IDX, images magic 0x00000803 (N,28,28), labels magic
// 0x00000801. Pixels are scaled by 1/255.
Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path);

// CIFAR binary batches: 1 label byte (CIFAR-10) or 2 (coarse, fine;
// CIFAR-100) then 3072 pixel bytes in R, G, B planes. CIFAR-100 keeps the
// fine label.
Dataset load_cifar_binary(const std::vector<std::filesystem::path>& paths,
                          std::size_t class_count);

// Writes records in the CIFAR-10 (class_count <= 10 -> 1 label byte) or
// CIFAR-100 layout. Images must be (N, 3, 32, 32) in [0, 1].
void write_cifar_binary(const Dataset& ds, const std::filesystem::path& path,
                        std::size_t label_bytes = 1);

// Stratified sample of n_per_class examples per class, order shuffled.
Dataset subsample(const Dataset& ds, std::size_t n_per_class,
                  std::uint64_t seed);

// The first `count` examples.
Dataset take(const Dataset& ds, std::size_t count);

// Selected examples, in the given order.
Dataset select(const Dataset& ds, const std::vector<std::size_t>& indices);

struct Normalization {
  std::vector<double> mean;
  std::vector<double> std;

  static Normalization identity(std::size_t channels);
  static Normalization mnist();
  static Normalization cifar10();
  static Normalization cifar100();
  static Normalization for_dataset(const std::string& name,
                                   std::size_t channels);
};

// (pixel - mean) / std per channel.
Tensor normalize(const Tensor& images, const Normalization& norm);
Dataset normalize(const Dataset& ds, const Normalization& norm);
Tensor denormalize(const Tensor& images, const Normalization& norm);

// FNV-1a over shape, pixels and labels.
std::uint64_t dataset_checksum(const Dataset& ds);

}  // namespace pushpull

#endif  // PUSHPULL_DATA_HPP_
