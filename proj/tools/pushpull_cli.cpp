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

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pushpull/harness.hpp"

namespace pp = pushpull;

namespace {

int exit_code(pp::ErrorCode code) {
  switch (code) {
    case pp::ErrorCode::kInvalidArgument:
    case pp::ErrorCode::kShapeMismatch:
    case pp::ErrorCode::kOutOfRange:
      return 3;
    case pp::ErrorCode::kFormat:
    case pp::ErrorCode::kIo:
      return 4;
    case pp::ErrorCode::kDiverged:
      return 5;
    case pp::ErrorCode::kMissingContext:
      break;
  }
  return 1;
}

void log_event(const std::string& event, const std::string& fields) {
  std::cerr << "event=" << event << ' ' << fields << '\n';
}

std::string epoch_fields(const pp::EpochStats& s) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "epoch=%d loss=%.6f train_accuracy=%.4f",
                s.epoch, s.loss, s.accuracy);
  return buf;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      pp::fail(pp::ErrorCode::kInvalidArgument,
               "bad number '" + item + "' in list '" + text + "'");
    }
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) pp::fail(pp::ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

int run_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& out) {
  pp::TrainConfig config = pp::load_train_config(config_path);
  if (seed) config.seed = *seed;
  if (!out.empty()) config.checkpoint_path = out;
  if (config.checkpoint_path.empty()) {
    pp::fail(pp::ErrorCode::kInvalidArgument,
             "no checkpoint path: pass --out or set \"checkpoint\" in the config");
  }
  log_event("train_start", "model=" + config.model.name +
                               " seed=" + std::to_string(config.seed) +
                               " config_hash=" + pp::config_hash(config));
  const auto result = pp::train(config, [](const pp::EpochStats& s) {
    log_event("epoch", epoch_fields(s));
  });
  log_event("train_done", "checkpoint=" + config.checkpoint_path);
  return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& grid_text,
             const std::string& out, const std::string& data_dir,
             std::optional<std::size_t> limit, std::uint64_t seed,
             const std::string& json_out) {
  const auto grid = pp::parse_grid(grid_text);
  const pp::Checkpoint ckpt = pp::load_checkpoint(ckpt_path);
  pp::Model model = pp::restore_model(ckpt);
  pp::DatasetConfig dc;
  dc.name = ckpt.dataset;
  dc.dir = data_dir;
  dc.test_limit = limit;
  const pp::Dataset test = pp::load_test_set(dc);
  log_event("eval_start", "model=" + ckpt.spec.name +
                              " images=" + std::to_string(test.size()) +
                              " cells=" + std::to_string(grid.size()));
  pp::EvalReport report =
      pp::evaluate(model, grid, test, ckpt.normalization, seed, ckpt.spec.name);
  pp::report_csv(report, out);
  if (!json_out.empty()) pp::report_json(report, json_out);
  log_event("eval_done", "report=" + out);
  return 0;
}

int run_sweep(const std::string& config_path, const std::string& h_text,
              const std::string& alpha_text, const std::string& grid_text,
              const std::string& out_dir, std::uint64_t seed) {
  const pp::TrainConfig base = pp::load_train_config(config_path);
  pp::Dataset train_set = pp::load_train_set(base.dataset);
  if (base.subsample_per_class) {
    train_set = pp::subsample(train_set, *base.subsample_per_class, base.seed);
  }
  const pp::Dataset test_set = pp::load_test_set(base.dataset);
  const auto rows = pp::sensitivity_sweep(
      base, parse_list(h_text), parse_list(alpha_text), pp::parse_grid(grid_text),
      train_set, test_set, seed,
      [](const std::string& model, const pp::EpochStats& s) {
        log_event("epoch", "model=" + model + ' ' + epoch_fields(s));
      });
  std::filesystem::create_directories(out_dir);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    pp::report_csv(rows[i].report,
                   std::filesystem::path(out_dir) /
                       ("report_" + std::to_string(i) + ".csv"));
  }
  write_text(std::filesystem::path(out_dir) / "matrix.csv",
             pp::sweep_matrix_csv(rows));
  log_event("sweep_done", "models=" + std::to_string(rows.size()) +
                              " matrix=" + (std::filesystem::path(out_dir) /
                                            "matrix.csv")
                                               .string());
  return 0;
}

int run_inspect(const std::string& ckpt_path) {
  const pp::Checkpoint ckpt = pp::load_checkpoint(ckpt_path);
  pp::Model model = pp::restore_model(ckpt);
  const pp::ModelSpec other_spec = ckpt.spec.with_first_layer(
      ckpt.spec.first_layer == pp::FirstLayer::kConv ? pp::FirstLayer::kPushPull
                                                     : pp::FirstLayer::kConv);
  const pp::Model other = pp::build_model(other_spec, ckpt.seed, pp::Init::kZero);
  const std::size_t n = pp::parameter_count(model);
  const std::size_t m = pp::parameter_count(other);

  std::cout << "model: " << ckpt.spec.name << '\n'
            << "family: " << pp::to_string(ckpt.spec.family) << '\n'
            << "first_layer: " << pp::to_string(ckpt.spec.first_layer) << '\n';
  if (ckpt.spec.first_layer == pp::FirstLayer::kPushPull) {
    std::cout << "pushpull: alpha=" << ckpt.spec.pushpull_alpha
              << " upsample=" << ckpt.spec.pushpull_upsample << '\n';
  }
  std::cout << "dataset: " << ckpt.dataset << '\n'
            << "seed: " << ckpt.seed << '\n'
            << "epochs_completed: " << ckpt.epochs_completed << '\n'
            << "parameters: " << n << '\n';
  for (const auto& p : model.parameters()) {
    std::cout << "  " << p.name << ' ' << pp::shape_str(p.param->value.shape())
              << ' ' << p.param->value.size() << '\n';
  }
  std::cout << "counterpart: " << other_spec.name << " parameters: " << m << '\n'
            << "parity: " << (n == m ? "ok" : "MISMATCH") << '\n';
  return n == m ? 0 : 6;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Push-pull layer training and robustness evaluation"};
  app.require_subcommand(1);

  std::string config_path, out, ckpt_path, grid_text = "none", data_dir,
                               json_out;
  std::string h_text = "1,1.5,2", alpha_text = "0.5,1,1.5";
  std::optional<std::uint64_t> train_seed;
  std::optional<std::size_t> limit;
  std::uint64_t eval_seed = 0;

  auto* train = app.add_subcommand("train", "Train a model from a JSON config");
  train->add_option("--config", config_path, "Config file")->required();
  train->add_option("--seed", train_seed, "Override the config seed");
  train->add_option("--out", out, "Checkpoint path");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a grid");
  eval->add_option("--ckpt", ckpt_path, "Checkpoint")->required();
  eval->add_option("--grid", grid_text,
                   "Perturbation grid, e.g. none;gaussian:0.1,0.2;poisson:1,2")
      ->required();
  eval->add_option("--out", out, "CSV report path")->required();
  eval->add_option("--data", data_dir, "Dataset directory");
  eval->add_option("--limit", limit, "Evaluate the first N test images");
  eval->add_option("--seed", eval_seed, "Master perturbation seed");
  eval->add_option("--json", json_out, "Also write a JSON report");

  auto* sweep = app.add_subcommand("sweep", "Sweep h and alpha of the push-pull layer");
  sweep->add_option("--config", config_path, "Base config file")->required();
  sweep->set_help_flag("--help", "Print this help message and exit");
  sweep->add_option("--h", h_text, "Upsampling factors");
  sweep->add_option("--alpha", alpha_text, "Inhibition strengths");
  sweep->add_option("--grid", grid_text, "Perturbation grid");
  sweep->add_option("--out", out, "Output directory")->required();
  sweep->add_option("--seed", eval_seed, "Master perturbation seed");

  auto* inspect = app.add_subcommand("inspect", "Describe a checkpoint");
  inspect->add_option("--ckpt", ckpt_path, "Checkpoint")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return run_train(config_path, train_seed, out);
    if (*eval) {
      return run_eval(ckpt_path, grid_text, out, data_dir, limit, eval_seed,
                      json_out);
    }
    if (*sweep) {
      return run_sweep(config_path, h_text, alpha_text, grid_text, out,
                       eval_seed);
    }
    if (*inspect) return run_inspect(ckpt_path);
  } catch (const pp::Error& e) {
    std::string code(pp::to_string(e.code()));
    std::replace(code.begin(), code.end(), ' ', '_');
    std::cerr << "error code=" << code << " message=\""
              << e.what() << "\"\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error code=internal message=\"" << e.what() << "\"\n";
    return 1;
  }
  return 1;
}
