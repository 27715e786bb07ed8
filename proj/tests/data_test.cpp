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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "oracles.hpp"
#include "pushpull/data.hpp"

namespace pp = pushpull;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> ramp_image(int offset) {
  std::vector<std::uint8_t> img(28 * 28);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<std::uint8_t>((i + offset) % 256);
  return img;
}

// Expects a format error whose message names both `file` and `offset`.
void expect_format_error(const std::function<void()>& f, const fs::path& file,
                         const std::string& offset) {
  try {
    f();
    ADD_FAILURE() << "no error";
  } catch (const pp::Error& e) {
    EXPECT_EQ(e.code(), pp::ErrorCode::kFormat) << e.what();
    const std::string msg = e.what();
    EXPECT_NE(msg.find(file.filename().string()), std::string::npos) << msg;
    EXPECT_NE(msg.find(offset), std::string::npos) << msg;
  }
}

std::vector<std::uint8_t> cifar_record(int label, std::size_t label_bytes, int seed) {
  std::vector<std::uint8_t> r(label_bytes + 3072);
  for (std::size_t b = 0; b < label_bytes; ++b) r[b] = static_cast<std::uint8_t>(label);
  if (label_bytes == 2) r[0] = 99;  // coarse label, ignored
  for (std::size_t i = 0; i < 3072; ++i) r[label_bytes + i] = static_cast<std::uint8_t>((i * 7 + seed) % 256);
  return r;
}

pp::Dataset toy(std::size_t per_class, std::size_t classes) {
  pp::Dataset ds;
  ds.name = "toy";
  ds.class_count = classes;
  const std::size_t n = per_class * classes;
  ds.images = pp::Tensor({n, 1, 2, 2});
  for (std::size_t i = 0; i < n; ++i) {
    ds.labels.push_back(static_cast<int>(i % classes));
    for (std::size_t j = 0; j < 4; ++j) ds.images[i * 4 + j] = static_cast<float>(i);
  }
  return ds;
}

}  // namespace

TEST(Mnist, TwoImageFixture) {
  const fs::path dir = oracle::temp_dir("mnist_fixture");
  oracle::write_idx_images(dir / "img", {ramp_image(0), ramp_image(100)});
  oracle::write_idx_labels(dir / "lab", {7, 2});
  const pp::Dataset ds = pp::load_mnist_idx(dir / "img", dir / "lab");
  ASSERT_EQ(ds.images.shape(), (pp::Shape{2, 1, 28, 28}));
  EXPECT_EQ(ds.labels, (std::vector<int>{7, 2}));
  EXPECT_EQ(ds.class_count, 10u);
  EXPECT_FALSE(ds.normalized);
  EXPECT_EQ(ds.images.at(0, 0, 0, 0), 0.0f);
  EXPECT_EQ(ds.images.at(0, 0, 0, 5), 5.0f / 255.0f);
  EXPECT_EQ(ds.images.at(1, 0, 0, 0), 100.0f / 255.0f);
  EXPECT_EQ(ds.images.at(0, 0, 9, 3), static_cast<float>((9 * 28 + 3) % 256) / 255.0f);
}

TEST(Mnist, WrongMagic) {
  const fs::path dir = oracle::temp_dir("mnist_magic");
  oracle::write_idx_images(dir / "img", {ramp_image(0)});
  oracle::write_idx_labels(dir / "lab", {1});
  expect_format_error([&] { pp::load_mnist_idx(dir / "lab", dir / "img"); },
                      dir / "lab", "offset 0");
}

TEST(Mnist, TruncatedImages) {
  const fs::path dir = oracle::temp_dir("mnist_trunc");
  oracle::write_idx_images(dir / "img", {ramp_image(0), ramp_image(1)});
  oracle::write_idx_labels(dir / "lab", {1, 2});
  fs::resize_file(dir / "img", 16 + 784 + 100);
  expect_format_error([&] { pp::load_mnist_idx(dir / "img", dir / "lab"); },
                      dir / "img", "offset 900");
}

TEST(Mnist, TruncatedHeader) {
  const fs::path dir = oracle::temp_dir("mnist_header");
  oracle::write_idx_images(dir / "img", {ramp_image(0)});
  oracle::write_idx_labels(dir / "lab", {1});
  fs::resize_file(dir / "img", 10);
  expect_format_error([&] { pp::load_mnist_idx(dir / "img", dir / "lab"); },
                      dir / "img", "offset 8");
}

TEST(Mnist, TrailingBytes) {
  const fs::path dir = oracle::temp_dir("mnist_trailing");
  oracle::write_idx_images(dir / "img", {ramp_image(0)});
  oracle::write_idx_labels(dir / "lab", {1});
  {
    std::ofstream out(dir / "lab", std::ios::binary | std::ios::app);
    out.put(0);
  }
  expect_format_error([&] { pp::load_mnist_idx(dir / "img", dir / "lab"); },
                      dir / "lab", "offset 9");
}

TEST(Mnist, CountMismatch) {
  const fs::path dir = oracle::temp_dir("mnist_count");
  oracle::write_idx_images(dir / "img", {ramp_image(0), ramp_image(1)});
  oracle::write_idx_labels(dir / "lab", {1});
  EXPECT_THROW(pp::load_mnist_idx(dir / "img", dir / "lab"), pp::Error);
}

TEST(Mnist, LabelOutOfRange) {
  const fs::path dir = oracle::temp_dir("mnist_label");
  oracle::write_idx_images(dir / "img", {ramp_image(0), ramp_image(1)});
  oracle::write_idx_labels(dir / "lab", {1, 10});
  expect_format_error([&] { pp::load_mnist_idx(dir / "img", dir / "lab"); },
                      dir / "lab", "offset 9");
}

TEST(Mnist, MissingFileIsIoError) {
  const fs::path dir = oracle::temp_dir("mnist_missing");
  try {
    pp::load_mnist_idx(dir / "nope", dir / "nope2");
    ADD_FAILURE();
  } catch (const pp::Error& e) {
    EXPECT_EQ(e.code(), pp::ErrorCode::kIo);
  }
}

TEST(Mnist, BundledSubset) {
  const fs::path root = PUSHPULL_SOURCE_DIR "/data/mnist-subset";
  const pp::Dataset train =
      pp::load_mnist_idx(root / "train-images-idx3-ubyte", root / "train-labels-idx1-ubyte");
  const pp::Dataset test =
      pp::load_mnist_idx(root / "t10k-images-idx3-ubyte", root / "t10k-labels-idx1-ubyte");
  EXPECT_EQ(train.size(), 6000u);
  EXPECT_EQ(test.size(), 4000u);
  train.validate();
  std::set<int> seen(train.labels.begin(), train.labels.end());
  EXPECT_EQ(seen.size(), 10u);
  double mean = 0;
  for (float v : train.images.data()) mean += v;
  mean /= static_cast<double>(train.images.size());
  EXPECT_NEAR(mean, 0.1307, 0.01);
}

TEST(Cifar, TenClassFixture) {
  const fs::path dir = oracle::temp_dir("cifar10_fixture");
  auto bytes = cifar_record(3, 1, 0);
  const auto second = cifar_record(9, 1, 5);
  bytes.insert(bytes.end(), second.begin(), second.end());
  oracle::write_bytes(dir / "b.bin", bytes);
  const pp::Dataset ds = pp::load_cifar_binary({dir / "b.bin"}, 10);
  ASSERT_EQ(ds.images.shape(), (pp::Shape{2, 3, 32, 32}));
  EXPECT_EQ(ds.labels, (std::vector<int>{3, 9}));
  EXPECT_EQ(ds.name, "cifar10");
  EXPECT_EQ(ds.images.at(0, 0, 0, 1), 7.0f / 255.0f);
  EXPECT_EQ(ds.images.at(0, 1, 0, 0), static_cast<float>((1024 * 7) % 256) / 255.0f);
  EXPECT_EQ(ds.images.at(1, 2, 31, 31), static_cast<float>((3071 * 7 + 5) % 256) / 255.0f);
}

TEST(Cifar, HundredClassKeepsFineLabel) {
  const fs::path dir = oracle::temp_dir("cifar100_fixture");
  auto bytes = cifar_record(42, 2, 0);
  const auto second = cifar_record(0, 2, 1);
  bytes.insert(bytes.end(), second.begin(), second.end());
  oracle::write_bytes(dir / "train.bin", bytes);
  const pp::Dataset ds = pp::load_cifar_binary({dir / "train.bin"}, 100);
  EXPECT_EQ(ds.labels, (std::vector<int>{42, 0}));
  EXPECT_EQ(ds.name, "cifar100");
  EXPECT_EQ(ds.images.at(1, 0, 0, 0), 1.0f / 255.0f);
}

TEST(Cifar, ConcatenatesBatches) {
  const fs::path dir = oracle::temp_dir("cifar_concat");
  oracle::write_bytes(dir / "a.bin", cifar_record(1, 1, 0));
  oracle::write_bytes(dir / "b.bin", cifar_record(2, 1, 0));
  EXPECT_EQ(pp::load_cifar_binary({dir / "a.bin", dir / "b.bin"}, 10).labels,
            (std::vector<int>{1, 2}));
}

TEST(Cifar, PartialRecord) {
  const fs::path dir = oracle::temp_dir("cifar_partial");
  auto bytes = cifar_record(1, 1, 0);
  bytes.resize(3000);
  oracle::write_bytes(dir / "b.bin", bytes);
  expect_format_error([&] { pp::load_cifar_binary({dir / "b.bin"}, 10); },
                      dir / "b.bin", "3073");
}

TEST(Cifar, LabelBeyondClassCount) {
  const fs::path dir = oracle::temp_dir("cifar_label");
  auto bytes = cifar_record(1, 1, 0);
  const auto bad = cifar_record(10, 1, 0);
  bytes.insert(bytes.end(), bad.begin(), bad.end());
  oracle::write_bytes(dir / "b.bin", bytes);
  expect_format_error([&] { pp::load_cifar_binary({dir / "b.bin"}, 10); },
                      dir / "b.bin", "offset 3073");
}

TEST(Cifar, WriteThenReadRoundTrip) {
  const fs::path dir = oracle::temp_dir("cifar_roundtrip");
  pp::Dataset ds;
  ds.class_count = 10;
  ds.images = pp::tensor_cast<float>(oracle::random_tensor({5, 3, 32, 32}, 3, 0.0, 1.0));
  ds.labels = {0, 4, 9, 1, 1};
  pp::write_cifar_binary(ds, dir / "b.bin");
  const pp::Dataset back = pp::load_cifar_binary({dir / "b.bin"}, 10);
  EXPECT_EQ(back.labels, ds.labels);
  for (std::size_t i = 0; i < ds.images.size(); ++i) {
    ASSERT_NEAR(back.images[i], ds.images[i], 0.5 / 255 + 1e-6);
  }
  ds.class_count = 100;
  ds.labels[2] = 77;
  pp::write_cifar_binary(ds, dir / "c.bin", 2);
  EXPECT_EQ(pp::load_cifar_binary({dir / "c.bin"}, 100).labels, ds.labels);
}

TEST(Subsample, StratifiedCounts) {
  const pp::Dataset ds = toy(20, 4);
  const pp::Dataset sub = pp::subsample(ds, 7, 1);
  EXPECT_EQ(sub.size(), 28u);
  std::map<int, int> counts;
  for (int l : sub.labels) ++counts[l];
  for (int c = 0; c < 4; ++c) EXPECT_EQ(counts[c], 7);
  for (std::size_t i = 0; i < sub.size(); ++i) {
    const auto src = static_cast<std::size_t>(sub.images[i * 4]);
    EXPECT_EQ(ds.labels[src], sub.labels[i]);
  }
}

TEST(Subsample, DeterministicPerSeed) {
  const pp::Dataset ds = toy(20, 4);
  EXPECT_EQ(pp::subsample(ds, 5, 9).images, pp::subsample(ds, 5, 9).images);
  EXPECT_NE(pp::subsample(ds, 5, 9).images, pp::subsample(ds, 5, 10).images);
}

TEST(Subsample, FullCountIsPermutation) {
  const pp::Dataset ds = toy(6, 3);
  const pp::Dataset sub = pp::subsample(ds, 6, 4);
  std::multiset<float> a(ds.images.data().begin(), ds.images.data().end());
  std::multiset<float> b(sub.images.data().begin(), sub.images.data().end());
  EXPECT_EQ(a, b);
}

TEST(Subsample, InsufficientClass) {
  pp::Dataset ds = toy(5, 3);
  EXPECT_THROW(pp::subsample(ds, 6, 1), pp::Error);
  EXPECT_THROW(pp::subsample(ds, 0, 1), pp::Error);
}

TEST(Dataset, TakeAndBatch) {
  const pp::Dataset ds = toy(3, 2);
  const pp::Dataset first = pp::take(ds, 4);
  EXPECT_EQ(first.size(), 4u);
  EXPECT_EQ(first.images[3 * 4], 3.0f);
  EXPECT_THROW(pp::take(ds, 7), pp::Error);
  EXPECT_THROW(ds.batch(5, 2), pp::Error);
  EXPECT_EQ(ds.batch({5, 0}).at(0, 0, 1, 1), 5.0f);
}

TEST(Dataset, ValidateCatchesBadLabel) {
  pp::Dataset ds = toy(2, 2);
  ds.labels[1] = 2;
  EXPECT_THROW(ds.validate(), pp::Error);
}

TEST(Normalization, IdentityIsExact) {
  const pp::Tensor img = pp::tensor_cast<float>(oracle::random_tensor({2, 3, 4, 4}, 5, 0, 1));
  EXPECT_EQ(pp::normalize(img, pp::Normalization::identity(3)), img);
}

TEST(Normalization, HalfHalfMapsToSymmetricRange) {
  const pp::Tensor img({1, 1, 1, 3}, {0.0f, 0.5f, 1.0f});
  const pp::Tensor out = pp::normalize(img, {{0.5}, {0.5}});
  EXPECT_EQ(out[0], -1.0f);
  EXPECT_EQ(out[1], 0.0f);
  EXPECT_EQ(out[2], 1.0f);
}

TEST(Normalization, PerChannelRoundTrip) {
  const pp::Tensor img = pp::tensor_cast<float>(oracle::random_tensor({3, 3, 5, 5}, 6, 0, 1));
  const auto norm = pp::Normalization::cifar10();
  const pp::Tensor out = pp::normalize(img, norm);
  EXPECT_NEAR(out.at(1, 2, 3, 4), (img.at(1, 2, 3, 4) - 0.4465) / 0.2616, 1e-5);
  const pp::Tensor back = pp::denormalize(out, norm);
  for (std::size_t i = 0; i < img.size(); ++i) ASSERT_NEAR(back[i], img[i], 1e-6);
}

TEST(Normalization, Errors) {
  pp::Dataset ds = toy(2, 2);
  const pp::Dataset once = pp::normalize(ds, pp::Normalization::identity(1));
  EXPECT_TRUE(once.normalized);
  EXPECT_THROW(pp::normalize(once, pp::Normalization::identity(1)), pp::Error);
  EXPECT_THROW(pp::normalize(ds.images, pp::Normalization::identity(3)), pp::Error);
  EXPECT_THROW(pp::normalize(ds.images, {{0.0}, {0.0}}), pp::Error);
}

TEST(Normalization, Presets) {
  EXPECT_EQ(pp::Normalization::for_dataset("mnist", 1).mean, std::vector<double>{0.1307});
  EXPECT_EQ(pp::Normalization::for_dataset("cifar100", 3).std[2], 0.2762);
  EXPECT_EQ(pp::Normalization::for_dataset("other", 2).std, (std::vector<double>{1, 1}));
}

TEST(Checksum, StableAndSensitive) {
  const pp::Dataset ds = toy(3, 2);
  EXPECT_EQ(pp::dataset_checksum(ds), pp::dataset_checksum(toy(3, 2)));
  pp::Dataset changed = ds;
  changed.labels[0] = 1;
  EXPECT_NE(pp::dataset_checksum(ds), pp::dataset_checksum(changed));
  changed = ds;
  changed.images[5] += 1e-3f;
  EXPECT_NE(pp::dataset_checksum(ds), pp::dataset_checksum(changed));
}
