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

#include "pushpull/data.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>

namespace pushpull {
namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes,
                        std::size_t offset, const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) {
    fail(ErrorCode::kFormat, path.string() + ": truncated header at offset " +
                                 std::to_string(offset));
  }
  return (std::uint32_t{bytes[offset]} << 24) |
         (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) |
         std::uint32_t{bytes[offset + 3]};
}

void expect_magic(std::uint32_t got, std::uint32_t want,
                  const std::filesystem::path& path) {
  if (got != want) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), ": bad magic 0x%08x at offset 0 (want 0x%08x)",
                  got, want);
    fail(ErrorCode::kFormat, path.string() + buf);
  }
}

void expect_size(const std::vector<unsigned char>& bytes, std::size_t want,
                 const std::filesystem::path& path) {
  if (bytes.size() < want) {
    fail(ErrorCode::kFormat, path.string() + ": truncated, expected " +
                                 std::to_string(want) + " bytes, data ends at offset " +
                                 std::to_string(bytes.size()));
  }
  if (bytes.size() > want) {
    fail(ErrorCode::kFormat, path.string() + ": " +
                                 std::to_string(bytes.size() - want) +
                                 " trailing bytes after offset " +
                                 std::to_string(want));
  }
}

void fnv1a(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

Shape Dataset::image_shape() const {
  const Shape& s = images.shape();
  return Shape(s.begin() + 1, s.end());
}

Tensor Dataset::batch(std::size_t begin, std::size_t count) const {
  if (begin + count > size()) {
    fail(ErrorCode::kOutOfRange, "dataset " + name + ": batch [" +
                                     std::to_string(begin) + ", " +
                                     std::to_string(begin + count) +
                                     ") beyond " + std::to_string(size()));
  }
  const std::size_t per = images.size() / std::max<std::size_t>(size(), 1);
  Shape shape = images.shape();
  shape[0] = count;
  const auto first = images.data().begin() + static_cast<std::ptrdiff_t>(begin * per);
  return Tensor(shape, std::vector<float>(first, first + static_cast<std::ptrdiff_t>(count * per)));
}

Tensor Dataset::batch(const std::vector<std::size_t>& indices) const {
  const std::size_t per = images.size() / std::max<std::size_t>(size(), 1);
  Shape shape = images.shape();
  shape[0] = indices.size();
  std::vector<float> out(indices.size() * per);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= size()) {
      fail(ErrorCode::kOutOfRange, "dataset " + name + ": index " +
                                       std::to_string(indices[i]) +
                                       " beyond " + std::to_string(size()));
    }
    std::copy_n(images.data().begin() + static_cast<std::ptrdiff_t>(indices[i] * per), per,
                out.begin() + static_cast<std::ptrdiff_t>(i * per));
  }
  return Tensor(shape, std::move(out));
}

void Dataset::validate() const {
  if (images.rank() != 4 || images.dim(0) != labels.size()) {
    fail(ErrorCode::kShapeMismatch,
         "dataset " + name + ": images " + shape_str(images.shape()) +
             " vs " + std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= class_count) {
      fail(ErrorCode::kOutOfRange,
           "dataset " + name + ": label " + std::to_string(labels[i]) +
               " at index " + std::to_string(i) + " outside [0, " +
               std::to_string(class_count) + ")");
    }
  }
}

Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path) {
  const auto img = read_file(images_path);
  const auto lab = read_file(labels_path);
  expect_magic(read_be32(img, 0, images_path), 0x00000803, images_path);
  expect_magic(read_be32(lab, 0, labels_path), 0x00000801, labels_path);
  const std::size_t n = read_be32(img, 4, images_path);
  const std::size_t h = read_be32(img, 8, images_path);
  const std::size_t w = read_be32(img, 12, images_path);
  const std::size_t n_labels = read_be32(lab, 4, labels_path);
  if (n != n_labels) {
    fail(ErrorCode::kFormat, images_path.string() + " holds " +
                                 std::to_string(n) + " images but " +
                                 labels_path.string() + " holds " +
                                 std::to_string(n_labels) + " labels");
  }
  if (h != 28 || w != 28) {
    fail(ErrorCode::kFormat, images_path.string() + ": images are " +
                                 std::to_string(h) + "x" + std::to_string(w) +
                                 ", expected 28x28");
  }
  if (n == 0) fail(ErrorCode::kFormat, images_path.string() + ": no images");
  expect_size(img, 16 + n * h * w, images_path);
  expect_size(lab, 8 + n, labels_path);

  Dataset ds;
  ds.name = "mnist";
  ds.class_count = 10;
  std::vector<float> pixels(n * h * w);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = static_cast<float>(img[16 + i]) / 255.0f;
  }
  ds.images = Tensor({n, 1, h, w}, std::move(pixels));
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (lab[8 + i] >= 10) {
      fail(ErrorCode::kFormat, labels_path.string() + ": label " +
                                   std::to_string(lab[8 + i]) +
                                   " at offset " + std::to_string(8 + i));
    }
    ds.labels[i] = lab[8 + i];
  }
  return ds;
}

Dataset load_cifar_binary(const std::vector<std::filesystem::path>& paths,
                          std::size_t class_count) {
  if (class_count == 0 || class_count > 256) {
    fail(ErrorCode::kInvalidArgument,
         "load_cifar_binary: class count " + std::to_string(class_count));
  }
  const std::size_t label_bytes = class_count > 10 ? 2 : 1;
  constexpr std::size_t kPixels = 3 * 32 * 32;
  const std::size_t record = label_bytes + kPixels;

  std::vector<float> pixels;
  std::vector<int> labels;
  for (const auto& path : paths) {
    const auto bytes = read_file(path);
    if (bytes.size() % record != 0) {
      fail(ErrorCode::kFormat,
           path.string() + ": " + std::to_string(bytes.size()) +
               " bytes is not a multiple of the " + std::to_string(record) +
               "-byte record size");
    }
    const std::size_t n = bytes.size() / record;
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t off = r * record;
      const int label = bytes[off + label_bytes - 1];
      if (static_cast<std::size_t>(label) >= class_count) {
        fail(ErrorCode::kFormat,
             path.string() + ": label " + std::to_string(label) +
                 " at offset " + std::to_string(off + label_bytes - 1) +
                 " exceeds class count " + std::to_string(class_count));
      }
      labels.push_back(label);
      for (std::size_t i = 0; i < kPixels; ++i) {
        pixels.push_back(static_cast<float>(bytes[off + label_bytes + i]) /
                         255.0f);
      }
    }
  }
  if (labels.empty()) fail(ErrorCode::kFormat, "load_cifar_binary: no records");
  Dataset ds;
  ds.name = class_count > 10 ? "cifar100" : "cifar10";
  ds.class_count = class_count;
  const std::size_t n = labels.size();
  ds.images = Tensor({n, 3, 32, 32}, std::move(pixels));
  ds.labels = std::move(labels);
  return ds;
}

void write_cifar_binary(const Dataset& ds, const std::filesystem::path& path,
                        std::size_t label_bytes) {
  if (ds.images.rank() != 4 || ds.image_shape() != Shape{3, 32, 32}) {
    fail(ErrorCode::kShapeMismatch,
         "write_cifar_binary: images must be (N,3,32,32), got " +
             shape_str(ds.images.shape()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  constexpr std::size_t kPixels = 3 * 32 * 32;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t b = 0; b < label_bytes; ++b) {
      out.put(static_cast<char>(ds.labels[r]));
    }
    for (std::size_t i = 0; i < kPixels; ++i) {
      const float v = std::clamp(ds.images[r * kPixels + i], 0.0f, 1.0f);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f))));
    }
  }
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

Dataset select(const Dataset& ds, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.name = ds.name;
  out.class_count = ds.class_count;
  out.normalized = ds.normalized;
  out.images = ds.batch(indices);
  out.labels.reserve(indices.size());
  for (auto i : indices) out.labels.push_back(ds.labels[i]);
  return out;
}

Dataset take(const Dataset& ds, std::size_t count) {
  if (count > ds.size()) {
    fail(ErrorCode::kOutOfRange, "dataset " + ds.name + ": cannot take " +
                                     std::to_string(count) + " of " +
                                     std::to_string(ds.size()));
  }
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return select(ds, idx);
}

Dataset subsample(const Dataset& ds, std::size_t n_per_class,
                  std::uint64_t seed) {
  if (n_per_class == 0) {
    fail(ErrorCode::kInvalidArgument, "subsample: n_per_class must be > 0");
  }
  std::vector<std::vector<std::size_t>> by_class(ds.class_count);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    by_class.at(static_cast<std::size_t>(ds.labels[i])).push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& idx = by_class[c];
    if (idx.size() < n_per_class) {
      fail(ErrorCode::kInvalidArgument,
           "subsample: class " + std::to_string(c) + " of " + ds.name +
               " has " + std::to_string(idx.size()) + " examples, need " +
               std::to_string(n_per_class));
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    chosen.insert(chosen.end(), idx.begin(),
                  idx.begin() + static_cast<std::ptrdiff_t>(n_per_class));
  }
  std::shuffle(chosen.begin(), chosen.end(), rng);
  return select(ds, chosen);
}

Normalization Normalization::identity(std::size_t channels) {
  return {std::vector<double>(channels, 0.0), std::vector<double>(channels, 1.0)};
}

Normalization Normalization::mnist() { return {{0.1307}, {0.3081}}; }

Normalization Normalization::cifar10() {
  return {{0.4914, 0.4822, 0.4465}, {0.2470, 0.2435, 0.2616}};
}

Normalization Normalization::cifar100() {
  return {{0.5071, 0.4865, 0.4409}, {0.2673, 0.2564, 0.2762}};
}

Normalization Normalization::for_dataset(const std::string& name,
                                         std::size_t channels) {
  if (name == "mnist") return mnist();
  if (name == "cifar10") return cifar10();
  if (name == "cifar100") return cifar100();
  return identity(channels);
}

Tensor normalize(const Tensor& images, const Normalization& norm) {
  if (images.rank() != 4 || norm.mean.size() != images.dim(1) ||
      norm.std.size() != images.dim(1)) {
    fail(ErrorCode::kShapeMismatch,
         "normalize: " + std::to_string(norm.mean.size()) +
             " channel statistics for images " + shape_str(images.shape()));
  }
  for (double s : norm.std) {
    if (!(s > 0)) fail(ErrorCode::kInvalidArgument, "normalize: std must be > 0");
  }
  const std::size_t c = images.dim(1), hw = images.dim(2) * images.dim(3);
  Tensor out(images.shape());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::size_t ch = (i / hw) % c;
    out[i] = static_cast<float>((images[i] - norm.mean[ch]) / norm.std[ch]);
  }
  return out;
}

Dataset normalize(const Dataset& ds, const Normalization& norm) {
  if (ds.normalized) {
    fail(ErrorCode::kInvalidArgument,
         "normalize: dataset " + ds.name + " is already normalized");
  }
  Dataset out = ds;
  out.images = normalize(ds.images, norm);
  out.normalized = true;
  return out;
}

Tensor denormalize(const Tensor& images, const Normalization& norm) {
  if (images.rank() != 4 || norm.mean.size() != images.dim(1)) {
    fail(ErrorCode::kShapeMismatch, "denormalize: channel mismatch");
  }
  const std::size_t c = images.dim(1), hw = images.dim(2) * images.dim(3);
  Tensor out(images.shape());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::size_t ch = (i / hw) % c;
    out[i] = static_cast<float>(images[i] * norm.std[ch] + norm.mean[ch]);
  }
  return out;
}

std::uint64_t dataset_checksum(const Dataset& ds) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto d : ds.images.shape()) {
    const std::uint64_t v = d;
    fnv1a(h, &v, sizeof(v));
  }
  fnv1a(h, ds.images.data().data(), ds.images.size() * sizeof(float));
  fnv1a(h, ds.labels.data(), ds.labels.size() * sizeof(int));
  return h;
}

}  // namespace pushpull
