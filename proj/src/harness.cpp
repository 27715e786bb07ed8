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

#include "pushpull/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "pushpull/optim.hpp"

namespace pushpull {
namespace {

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::filesystem::path> resolve_all(
    const std::string& dir, const std::vector<std::string>& files,
    const std::vector<std::string>& defaults) {
  const auto& names = files.empty() ? defaults : files;
  std::vector<std::filesystem::path> out;
  for (const auto& f : names) {
    std::filesystem::path p = f;
    if (!dir.empty() && p.is_relative()) p = std::filesystem::path(dir) / p;
    out.push_back(resolve_data_path(p));
  }
  return out;
}

Dataset load_split(const DatasetConfig& c, bool train) {
  const auto& files = train ? c.train_files : c.test_files;
  if (c.name == "mnist") {
    const auto paths = resolve_all(
        c.dir, files,
        train ? std::vector<std::string>{"train-images-idx3-ubyte",
                                         "train-labels-idx1-ubyte"}
              : std::vector<std::string>{"t10k-images-idx3-ubyte",
                                         "t10k-labels-idx1-ubyte"});
    if (paths.size() != 2) {
      fail(ErrorCode::kInvalidArgument,
           "mnist dataset needs exactly {images, labels} files");
    }
    return load_mnist_idx(paths[0], paths[1]);
  }
  if (c.name == "cifar10") {
    return load_cifar_binary(
        resolve_all(c.dir, files,
                    train ? std::vector<std::string>{"data_batch_1.bin",
                                                     "data_batch_2.bin",
                                                     "data_batch_3.bin",
                                                     "data_batch_4.bin",
                                                     "data_batch_5.bin"}
                          : std::vector<std::string>{"test_batch.bin"}),
        10);
  }
  if (c.name == "cifar100") {
    return load_cifar_binary(
        resolve_all(c.dir, files,
                    {train ? std::string("train.bin") : std::string("test.bin")}),
        100);
  }
  fail(ErrorCode::kInvalidArgument, "unknown dataset '" + c.name + "'");
}

std::size_t argmax_row(const Tensor& logits, std::size_t row) {
  const std::size_t k = logits.dim(1);
  const float* p = logits.data().data() + row * k;
  return static_cast<std::size_t>(std::max_element(p, p + k) - p);
}

}  // namespace

std::filesystem::path resolve_data_path(const std::filesystem::path& p) {
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv(kDataRootEnv); root && *root) {
    return std::filesystem::path(root) / p;
  }
  return p;
}

Dataset load_train_set(const DatasetConfig& config) {
  return load_split(config, true);
}

Dataset load_test_set(const DatasetConfig& config) {
  Dataset ds = load_split(config, false);
  if (config.test_limit && *config.test_limit < ds.size()) {
    ds = take(ds, *config.test_limit);
  }
  return ds;
}

void TrainConfig::validate() const {
  model.validate();
  if (epochs < 1) {
    fail(ErrorCode::kInvalidArgument,
         "train: epochs must be >= 1, got " + std::to_string(epochs));
  }
  if (batch_size < 1) {
    fail(ErrorCode::kInvalidArgument, "train: batch size must be >= 1");
  }
  sgd.validate();
  if (subsample_per_class && *subsample_per_class == 0) {
    fail(ErrorCode::kInvalidArgument, "train: subsample must be > 0 per class");
  }
}

Normalization TrainConfig::effective_normalization() const {
  if (normalization) return *normalization;
  return Normalization::for_dataset(dataset.name, model.input_shape[0]);
}

void to_json(Json& j, const DatasetConfig& c) {
  j = Json{{"name", c.name}, {"dir", c.dir}};
  if (!c.train_files.empty()) j["train_files"] = c.train_files;
  if (!c.test_files.empty()) j["test_files"] = c.test_files;
  if (c.test_limit) j["test_limit"] = *c.test_limit;
}

void from_json(const Json& j, DatasetConfig& c) {
  c.name = j.value("name", std::string("mnist"));
  c.dir = j.value("dir", std::string());
  c.train_files = j.value("train_files", std::vector<std::string>{});
  c.test_files = j.value("test_files", std::vector<std::string>{});
  if (j.contains("test_limit")) c.test_limit = j.at("test_limit").get<std::size_t>();
}

void to_json(Json& j, const TrainConfig& c) {
  j = Json{{"model", c.model},     {"dataset", c.dataset},
           {"epochs", c.epochs},   {"batch_size", c.batch_size},
           {"sgd", c.sgd},         {"seed", c.seed},
           {"checkpoint", c.checkpoint_path}};
  if (c.subsample_per_class) j["subsample_per_class"] = *c.subsample_per_class;
  if (c.normalization) j["normalization"] = *c.normalization;
}

void from_json(const Json& j, TrainConfig& c) {
  c = TrainConfig{};
  if (j.contains("model")) c.model = j.at("model").get<ModelSpec>();
  if (j.contains("dataset")) c.dataset = j.at("dataset").get<DatasetConfig>();
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  if (j.contains("sgd")) c.sgd = j.at("sgd").get<SgdConfig>();
  c.seed = j.value("seed", c.seed);
  c.checkpoint_path = j.value("checkpoint", std::string());
  if (j.contains("subsample_per_class")) {
    c.subsample_per_class = j.at("subsample_per_class").get<std::size_t>();
  }
  if (j.contains("normalization")) {
    c.normalization = j.at("normalization").get<Normalization>();
  }
  c.validate();
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config " + path.string());
  try {
    return Json::parse(in, nullptr, true, /*ignore_comments=*/true)
        .get<TrainConfig>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
}

std::string config_hash(const TrainConfig& config) {
  const std::string canon = Json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

TrainResult train(const TrainConfig& config, const Dataset& train_set,
                  const TrainLogger& logger) {
  config.validate();
  train_set.validate();
  const auto& in = config.model.input_shape;
  if (train_set.image_shape() != Shape{in[0], in[1], in[2]}) {
    fail(ErrorCode::kShapeMismatch,
         "train: dataset images " + shape_str(train_set.image_shape()) +
             " do not match model input");
  }
  if (train_set.class_count > config.model.num_classes) {
    fail(ErrorCode::kShapeMismatch,
         "train: dataset has " + std::to_string(train_set.class_count) +
             " classes, model only " + std::to_string(config.model.num_classes));
  }
  const Normalization norm = config.effective_normalization();
  const Dataset data = normalize(train_set, norm);

  Model model = build_model(config.model, config.seed);
  Sgd sgd(config.sgd);
  const auto params = model.parameter_ptrs();
  std::mt19937_64 order_rng(config.seed ^ 0x5851f42d4c957f2dULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  Checkpoint last_good =
      make_checkpoint(model, config.seed, train_set.name, norm, 0);
  std::vector<EpochStats> history;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double loss_sum = 0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
      std::vector<int> labels(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = data.labels[idx[i]];

      model.zero_grad();
      const Tensor logits = model.forward(data.batch(idx), Mode::kTrain);
      const auto loss = softmax_cross_entropy(logits, std::span<const int>(labels));
      if (!std::isfinite(loss.loss)) {
        if (!config.checkpoint_path.empty()) {
          save_checkpoint(last_good, config.checkpoint_path);
        }
        fail(ErrorCode::kDiverged,
             "train: loss became " + std::to_string(loss.loss) + " in epoch " +
                 std::to_string(epoch + 1) + "; last good checkpoint is epoch " +
                 std::to_string(last_good.epochs_completed));
      }
      model.backward(loss.grad_logits);
      sgd.step(params, epoch);

      loss_sum += static_cast<double>(loss.loss) * static_cast<double>(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (argmax_row(logits, i) == static_cast<std::size_t>(labels[i])) ++correct;
      }
    }
    EpochStats stats{epoch + 1, loss_sum / static_cast<double>(data.size()),
                     static_cast<double>(correct) / static_cast<double>(data.size())};
    history.push_back(stats);
    last_good = make_checkpoint(model, config.seed, train_set.name, norm, epoch + 1);
    if (logger) logger(stats);
  }
  if (!config.checkpoint_path.empty()) {
    save_checkpoint(last_good, config.checkpoint_path);
  }
  return {std::move(model), std::move(last_good), std::move(history)};
}

TrainResult train(const TrainConfig& config, const TrainLogger& logger) {
  config.validate();
  Dataset ds = load_train_set(config.dataset);
  if (config.subsample_per_class) {
    ds = subsample(ds, *config.subsample_per_class, config.seed);
  }
  return train(config, ds, logger);
}

double EvalReport::accuracy(PerturbationKind kind, double param) const {
  for (const auto& r : records) {
    if (r.kind == kind && (kind == PerturbationKind::kNone || r.param == param)) {
      return r.accuracy;
    }
  }
  fail(ErrorCode::kOutOfRange, "report " + model_id + " has no cell " +
                                   std::string(to_string(kind)) + ":" +
                                   format_param(param));
}

void EvalReport::sort_records() {
  std::stable_sort(records.begin(), records.end(),
                   [](const EvalRecord& a, const EvalRecord& b) {
                     if (a.kind != b.kind) return a.kind < b.kind;
                     return a.param < b.param;
                   });
}

EvalReport evaluate(Model& model, const std::vector<PerturbationSpec>& grid,
                    const Dataset& test_set, const Normalization& norm,
                    std::uint64_t master_seed, const std::string& model_id) {
  test_set.validate();
  if (test_set.normalized) {
    fail(ErrorCode::kInvalidArgument,
         "evaluate: test set must be in [0,1]; perturbations are applied "
         "before normalization");
  }
  const auto& in = model.spec().input_shape;
  if (test_set.image_shape() != Shape{in[0], in[1], in[2]}) {
    fail(ErrorCode::kShapeMismatch,
         "evaluate: test images " + shape_str(test_set.image_shape()) +
             " do not match model " + model.spec().name + " input (" +
             std::to_string(in[0]) + "," + std::to_string(in[1]) + "," +
             std::to_string(in[2]) + ")");
  }
  constexpr std::size_t kBatch = 100;
  EvalReport report;
  report.model_id = model_id;
  report.timestamp = utc_timestamp();

  for (const auto& cell : grid) {
    cell.validate();
    const double param = cell.parameter();
    EvalRecord rec{cell.kind, param, 0, 0, test_set.size(), master_seed};
    for (std::size_t begin = 0; begin < test_set.size(); begin += kBatch) {
      const std::size_t count = std::min(kBatch, test_set.size() - begin);
      Tensor batch = test_set.batch(begin, count);
      if (cell.kind != PerturbationKind::kNone) {
        const std::size_t per = batch.size() / count;
        Shape one = batch.shape();
        one[0] = 1;
        for (std::size_t i = 0; i < count; ++i) {
          auto first = batch.data().begin() + static_cast<std::ptrdiff_t>(i * per);
          Tensor image(one, std::vector<float>(first, first + static_cast<std::ptrdiff_t>(per)));
          Rng rng(derive_seed(master_seed, cell.kind, param, begin + i));
          const Tensor noisy = apply_perturbation(image, cell, rng);
          std::copy(noisy.data().begin(), noisy.data().end(), first);
        }
      }
      const Tensor logits = model.forward(normalize(batch, norm), Mode::kEval);
      for (std::size_t i = 0; i < count; ++i) {
        if (argmax_row(logits, i) ==
            static_cast<std::size_t>(test_set.labels[begin + i])) {
          ++rec.correct;
        }
      }
    }
    rec.accuracy = rec.n ? static_cast<double>(rec.correct) /
                               static_cast<double>(rec.n)
                         : 0.0;
    if (cell.kind == PerturbationKind::kNone) report.clean_accuracy = rec.accuracy;
    report.records.push_back(rec);
  }
  report.sort_records();
  return report;
}

std::string report_csv_string(const EvalReport& report) {
  EvalReport sorted = report;
  sorted.sort_records();
  std::ostringstream os;
  os << "model,perturbation,param,accuracy,n,seed\n";
  for (const auto& r : sorted.records) {
    char acc[32];
    std::snprintf(acc, sizeof(acc), "%.4f", r.accuracy);
    os << sorted.model_id << ',' << to_string(r.kind) << ','
       << format_param(r.param) << ',' << acc << ',' << r.n << ',' << r.seed
       << '\n';
  }
  return os.str();
}

void report_csv(const EvalReport& report, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write report " + path.string());
  out << report_csv_string(report);
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

EvalReport parse_report_csv_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "model,perturbation,param,accuracy,n,seed") {
    fail(ErrorCode::kFormat, "report csv: unexpected header '" + line + "'");
  }
  EvalReport report;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 6) {
      fail(ErrorCode::kFormat, "report csv: line " + std::to_string(line_no) +
                                   " has " + std::to_string(f.size()) +
                                   " fields");
    }
    report.model_id = f[0];
    EvalRecord r;
    try {
      r.kind = parse_perturbation_kind(f[1]);
      r.param = std::stod(f[2]);
      r.accuracy = std::stod(f[3]);
      r.n = std::stoull(f[4]);
      r.seed = std::stoull(f[5]);
    } catch (const std::logic_error&) {
      fail(ErrorCode::kFormat,
           "report csv: bad number on line " + std::to_string(line_no));
    }
    r.correct = static_cast<std::size_t>(
        std::llround(r.accuracy * static_cast<double>(r.n)));
    if (r.kind == PerturbationKind::kNone) report.clean_accuracy = r.accuracy;
    report.records.push_back(r);
  }
  return report;
}

EvalReport parse_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open report " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_report_csv_string(ss.str());
}

void report_json(const EvalReport& report, const std::filesystem::path& path) {
  Json j{{"model", report.model_id},
         {"timestamp", report.timestamp},
         {"config_hash", report.config_hash},
         {"records", Json::array()}};
  if (report.clean_accuracy) j["clean_accuracy"] = *report.clean_accuracy;
  for (const auto& r : report.records) {
    j["records"].push_back(Json{{"perturbation", std::string(to_string(r.kind))},
                                {"param", r.param},
                                {"accuracy", r.accuracy},
                                {"correct", r.correct},
                                {"n", r.n},
                                {"seed", r.seed}});
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write report " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<std::pair<double, double>> sweep_pairs(
    const std::vector<double>& h_values,
    const std::vector<double>& alpha_values) {
  std::vector<std::pair<double, double>> pairs;
  for (double h : h_values) {
    for (double a : alpha_values) {
      const std::pair<double, double> p{h, a};
      if (std::find(pairs.begin(), pairs.end(), p) == pairs.end()) {
        pairs.push_back(p);
      }
    }
  }
  return pairs;
}

std::vector<SweepRow> sensitivity_sweep(
    const TrainConfig& base, const std::vector<double>& h_values,
    const std::vector<double>& alpha_values,
    const std::vector<PerturbationSpec>& grid, const Dataset& train_set,
    const Dataset& test_set, std::uint64_t master_seed,
    const SweepLogger& logger) {
  const auto pairs = sweep_pairs(h_values, alpha_values);
  if (pairs.empty()) {
    fail(ErrorCode::kInvalidArgument, "sweep: no (h, alpha) pairs");
  }
  const Normalization norm = base.effective_normalization();

  auto run = [&](TrainConfig cfg, std::optional<double> h,
                 std::optional<double> alpha) {
    cfg.checkpoint_path.clear();
    const std::string name = cfg.model.name;
    TrainResult result = train(cfg, train_set, [&](const EpochStats& s) {
      if (logger) logger(name, s);
    });
    SweepRow row{name, h, alpha,
                 evaluate(result.model, grid, test_set, norm, master_seed, name)};
    row.report.config_hash = config_hash(cfg);
    return row;
  };

  std::vector<SweepRow> rows;
  TrainConfig baseline = base;
  baseline.model = base.model.with_first_layer(FirstLayer::kConv);
  rows.push_back(run(baseline, std::nullopt, std::nullopt));
  for (const auto& [h, alpha] : pairs) {
    TrainConfig cfg = base;
    cfg.model = base.model.with_first_layer(FirstLayer::kPushPull);
    cfg.model.pushpull_upsample = h;
    cfg.model.pushpull_alpha = alpha;
    cfg.model.name += "(h=" + format_param(h) + ",alpha=" + format_param(alpha) + ")";
    rows.push_back(run(cfg, h, alpha));
  }
  return rows;
}

std::string sweep_matrix_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "model,h,alpha";
  if (!rows.empty()) {
    for (const auto& r : rows.front().report.records) {
      os << ',' << to_string(r.kind);
      if (r.kind != PerturbationKind::kNone) os << ':' << format_param(r.param);
    }
  }
  os << '\n';
  for (const auto& row : rows) {
    os << row.model << ',' << (row.h ? format_param(*row.h) : "-") << ','
       << (row.alpha ? format_param(*row.alpha) : "-");
    for (const auto& r : row.report.records) {
      char acc[32];
      std::snprintf(acc, sizeof(acc), "%.4f", r.accuracy);
      os << ',' << acc;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace pushpull
