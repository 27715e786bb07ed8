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

#ifndef PUSHPULL_HARNESS_HPP_
#define PUSHPULL_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pushpull/checkpoint.hpp"
#include "pushpull/config_io.hpp"
#include "pushpull/data.hpp"
#include "pushpull/model.hpp"
#include "pushpull/perturb.hpp"

namespace pushpull {

// Environment variable naming the directory relative dataset paths are
// resolved against.
inline constexpr const char* kDataRootEnv = "PUSHPULL_DATA_ROOT";

std::filesystem::path resolve_data_path(const std::filesystem::path& p);

// Where a dataset lives. `dir` holds the standard file names
// (train-images-idx3-ubyte, ..., data_batch_1.bin, ..., train.bin/test.bin);
// the explicit file lists override them.
struct DatasetConfig {
  std::string name = "mnist";  // mnist | cifar10 | cifar100
  std::string dir;
  std::vector<std::string> train_files;  // mnist: {images, labels}
  std::vector<std::string> test_files;
  std::optional<std::size_t> test_limit;  // evaluate on the first N only
};

Dataset load_train_set(const DatasetConfig& config);
Dataset load_test_set(const DatasetConfig& config);

struct TrainConfig {
  ModelSpec model;
  DatasetConfig dataset;
  int epochs = 5;
  std::size_t batch_size = 64;
  SgdConfig sgd;
  std::uint64_t seed = 1;
  std::optional<std::size_t> subsample_per_class;
  std::string checkpoint_path;
  std::optional<Normalization> normalization;  // default per dataset

  void validate() const;
  Normalization effective_normalization() const;
};

void to_json(Json& j, const TrainConfig& config);
void from_json(const Json& j, TrainConfig& config);
void to_json(Json& j, const DatasetConfig& config);
void from_json(const Json& j, DatasetConfig& config);

TrainConfig load_train_config(const std::filesystem::path& path);

// Hex FNV-1a of the canonical JSON form.
std::string config_hash(const TrainConfig& config);

struct EpochStats {
  int epoch = 0;
  double loss = 0;
  double accuracy = 0;
};

struct TrainResult {
  Model model;
  Checkpoint checkpoint;
  std::vector<EpochStats> history;
};

using TrainLogger = std::function<void(const EpochStats&)>;

// Minibatch SGD on the clean training set (unnormalized, values in [0,1]).
// A NaN/Inf loss aborts with ErrorCode::kDiverged after writing the last
// good checkpoint to config.checkpoint_path (when set).
TrainResult train(const TrainConfig& config, const Dataset& train_set,
                  const TrainLogger& logger = {});

// Loads (and optionally subsamples) the configured training set first.
TrainResult train(const TrainConfig& config, const TrainLogger& logger = {});

struct EvalRecord {
  PerturbationKind kind = PerturbationKind::kNone;
  double param = 0;
  double accuracy = 0;
  std::size_t correct = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

struct EvalReport {
  std::string model_id;
  std::vector<EvalRecord> records;
  std::optional<double> clean_accuracy;
  std::string timestamp;
  std::string config_hash;

  // Accuracy of one cell; throws when the grid did not include it.
  double accuracy(PerturbationKind kind, double param = 0) const;

  // Perturbation kind, then ascending parameter.
  void sort_records();
};

// Each test image is perturbed with its own seed
// derive_seed(master_seed, kind, param, index), then normalized, then
// classified.
EvalReport evaluate(Model& model, const std::vector<PerturbationSpec>& grid,
                    const Dataset& test_set, const Normalization& norm,
                    std::uint64_t master_seed, const std::string& model_id);

// Header: model,perturbation,param,accuracy,n,seed.
std::string report_csv_string(const EvalReport& report);
void report_csv(const EvalReport& report, const std::filesystem::path& path);
EvalReport parse_report_csv(const std::filesystem::path& path);
EvalReport parse_report_csv_string(const std::string& text);

void report_json(const EvalReport& report, const std::filesystem::path& path);

// Distinct (h, alpha) pairs in first-seen order over the h-major product.
std::vector<std::pair<double, double>> sweep_pairs(
    const std::vector<double>& h_values, const std::vector<double>& alpha_values);

struct SweepRow {
  std::string model;
  std::optional<double> h;  // empty for the convolutional baseline
  std::optional<double> alpha;
  EvalReport report;
};

using SweepLogger = std::function<void(const std::string& model,
                                       const EpochStats& stats)>;

// Trains the convolutional baseline plus one push-pull model per distinct
// (h, alpha) pair with identical settings, and evaluates all of them on
// the same grid.
std::vector<SweepRow> sensitivity_sweep(
    const TrainConfig& base, const std::vector<double>& h_values,
    const std::vector<double>& alpha_values,
    const std::vector<PerturbationSpec>& grid, const Dataset& train_set,
    const Dataset& test_set, std::uint64_t master_seed,
    const SweepLogger& logger = {});

// One row per model, one accuracy column per grid cell.
std::string sweep_matrix_csv(const std::vector<SweepRow>& rows);

}  // namespace pushpull

#endif  // PUSHPULL_HARNESS_HPP_
