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

// Acceptance suite. Each criterion runs as its own subcommand and prints a
// single "PASS Cn ..." or "FAIL Cn ..." line; the exit status is 0 only on
// PASS. The `mnist-pipeline` step trains the B/PB checkpoints that C4, C5
// and C7 read.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "../oracles.hpp"
#include "pushpull/harness.hpp"

namespace pp = pushpull;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kGradRelTol = 1e-4;
constexpr double kGradBudgetS = 30;
constexpr double kLinearityTol = 1e-5;
constexpr double kReductionBudgetS = 5;
constexpr double kParityBudgetS = 10;
constexpr double kWrnCountTol = 0.05;
constexpr double kCleanFloor = 0.90;
constexpr double kCleanGapMax = 0.02;
constexpr double kNoiseGapMin = 0.03;
constexpr double kPipelineBudgetS = 15 * 60;
constexpr double kPoissonBudgetS = 120;
constexpr double kVarianceRelTol = 0.05;
constexpr double kPoissonMeanRelTol = 0.01;
constexpr double kStatsBudgetS = 60;

constexpr std::size_t kPerClass = 200;
constexpr int kEpochs = 10;
constexpr std::size_t kTestImages = 2000;
constexpr std::uint64_t kSeeds[] = {1, 2, 3};
constexpr std::uint64_t kEvalSeed = 2024;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

int report(const std::string& id, const std::string& title, const Outcome& o) {
  std::cout << (o.pass ? "PASS " : "FAIL ") << id << ' ' << title << ": " << o.detail
            << std::endl;
  return o.pass ? 0 : 1;
}

fs::path mnist_dir() {
  return pp::resolve_data_path(PUSHPULL_SOURCE_DIR "/data/mnist-subset");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) pp::fail(pp::ErrorCode::kIo, "cannot open " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// C1 --------------------------------------------------------------------

Outcome gradient_check() {
  Stopwatch clock;
  double worst = 0;
  int configs = 0;
  std::uint64_t seed = 100;
  for (double h : {1.0, 1.5, 2.0})
    for (double alpha : {0.5, 1.0, 1.5}) {
      pp::PushPullConfig cfg;
      cfg.in_channels = 2;
      cfg.out_channels = 3;
      cfg.kernel_size = 5;
      cfg.alpha = alpha;
      cfg.upsample = h;
      pp::TensorD k = oracle::random_tensor({3, 2, 5, 5}, ++seed, -0.5, 0.5);
      pp::TensorD b = oracle::random_tensor({3}, ++seed, -0.1, 0.1);
      pp::TensorD x = oracle::random_tensor({2, 2, 8, 8}, ++seed, 0.0, 1.0);
      const pp::TensorD w = oracle::random_tensor({2, 3, 8, 8}, ++seed);
      auto loss = [&] { return oracle::weighted_sum(pp::PushPullLayerD(cfg, k, b).forward(x), w); };

      const pp::PushPullLayerD layer(cfg, k, b);
      pp::PushPullLayerD::Context ctx;
      layer.forward(x, ctx);
      const auto g = layer.backward(w, ctx);
      worst = std::max({worst,
                        oracle::relative_error(g.grad_kernel.data(), oracle::numeric_gradient(k, loss)),
                        oracle::relative_error(g.grad_bias.data(), oracle::numeric_gradient(b, loss)),
                        oracle::relative_error(g.grad_input.data(), oracle::numeric_gradient(x, loss))});
      ++configs;
    }
  const double t = clock.seconds();
  return {worst < kGradRelTol && t < kGradBudgetS,
          fmt("max relative error %.3g over %d (h, alpha) configs, tol %.0e; %.1f s (budget %.0f s)",
              worst, configs, kGradRelTol, t, kGradBudgetS)};
}

// C2 --------------------------------------------------------------------

Outcome analytic_reductions() {
  Stopwatch clock;
  pp::PushPullConfig cfg;
  cfg.in_channels = 3;
  cfg.out_channels = 6;
  cfg.kernel_size = 5;
  cfg.alpha = 0.0;
  cfg.upsample = 2.0;
  const pp::Tensor k = pp::tensor_cast<float>(oracle::random_tensor({6, 3, 5, 5}, 1, -0.3, 0.3));
  const pp::Tensor b = pp::tensor_cast<float>(oracle::random_tensor({6}, 2, -0.1, 0.1));
  const pp::Tensor x = pp::tensor_cast<float>(oracle::random_tensor({4, 3, 16, 16}, 3, 0.0, 1.0));
  const pp::PushPullLayer zero_alpha(cfg, k, b);
  pp::PushPullLayer::Context ctx;
  const pp::Tensor out = zero_alpha.forward(x, ctx);
  const auto geom = pp::Conv2dGeometry::same(5);
  const pp::Tensor pre = pp::conv2d(x, k, std::span<const float>(b.data()), geom);
  const pp::Tensor g = pp::tensor_cast<float>(oracle::random_tensor(out.shape(), 4));
  const auto grads = zero_alpha.backward(g, ctx);
  const auto ref = pp::conv2d_backward(pp::relu_backward(g, pre), x, k, geom);
  const bool bitwise = out == pp::relu(pre) && grads.grad_input == ref.grad_input &&
                       grads.grad_kernel == ref.grad_kernel && grads.grad_bias == ref.grad_bias;

  cfg.alpha = 1.0;
  cfg.upsample = 1.0;
  cfg.bias = false;
  const pp::PushPullLayer linear(cfg, k);
  const pp::Tensor y = pp::tensor_cast<float>(oracle::random_tensor(x.shape(), 5, 0.0, 1.0));
  double worst = 0;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<float> coef(-2.0f, 2.0f);
  for (int trial = 0; trial < 10; ++trial) {
    const float a = coef(rng), c = coef(rng);
    pp::Tensor mix(x.shape());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + c * y[i];
    const pp::Tensor lhs = linear.forward(mix);
    const pp::Tensor px = linear.forward(x), py = linear.forward(y);
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      worst = std::max(worst, std::abs(double(lhs[i]) - (double(a) * px[i] + double(c) * py[i])));
    }
  }
  const double t = clock.seconds();
  return {bitwise && worst < kLinearityTol && t < kReductionBudgetS,
          fmt("alpha=0 bitwise %s; h=1 alpha=1 superposition max deviation %.3g (tol %.0e); "
              "%.2f s (budget %.0f s)",
              bitwise ? "equal" : "DIFFERENT", worst, kLinearityTol, t, kReductionBudgetS)};
}

// C3 --------------------------------------------------------------------

Outcome parameter_parity() {
  Stopwatch clock;
  bool ok = true;
  std::ostringstream notes;
  int pairs = 0;
  for (const char* name : {"A", "B", "C", "D"}) {
    const pp::ModelSpec conv = pp::lenet_preset(name);
    const std::size_t a = pp::build_model(conv, 1, pp::Init::kZero).parameter_count();
    const std::size_t b =
        pp::build_model(conv.with_first_layer(pp::FirstLayer::kPushPull), 1, pp::Init::kZero)
            .parameter_count();
    ++pairs;
    if (a != b) {
      ok = false;
      notes << name << ": " << a << " vs " << b << "; ";
    }
  }
  const std::map<std::size_t, double> wrn28 = {{1, 0.36e6}, {4, 5.8e6}, {8, 23.3e6}, {10, 36.4e6}};
  double worst_rel = 0;
  for (std::size_t depth : {16u, 22u, 28u, 40u})
    for (std::size_t widen : {1u, 4u, 8u, 10u}) {
      const std::size_t a = pp::build_model(pp::wideresnet_spec(depth, widen, false), 1, pp::Init::kZero)
                                .parameter_count();
      const std::size_t b = pp::build_model(pp::wideresnet_spec(depth, widen, true), 1, pp::Init::kZero)
                                .parameter_count();
      ++pairs;
      if (a != b) {
        ok = false;
        notes << "WRN-" << depth << '-' << widen << ": " << a << " vs " << b << "; ";
      }
      if (depth == 28) {
        const double rel = std::abs(static_cast<double>(a) - wrn28.at(widen)) / wrn28.at(widen);
        worst_rel = std::max(worst_rel, rel);
        notes << "WRN-28-" << widen << '=' << a << ' ';
      }
    }
  const double t = clock.seconds();
  ok = ok && worst_rel <= kWrnCountTol && t < kParityBudgetS;
  return {ok, fmt("%d pairs equal=%s; WRN-28 worst deviation %.2f%% (tol %.0f%%); %.1f s (budget %.0f s); ",
                  pairs, ok ? "yes" : "see notes", 100 * worst_rel, 100 * kWrnCountTol, t,
                  kParityBudgetS) +
                  notes.str()};
}

// MNIST pipeline (C4, C5, C7) -------------------------------------------

pp::TrainConfig mnist_config(const std::string& preset, std::uint64_t seed) {
  pp::TrainConfig c;
  c.model = pp::lenet_preset(preset);
  c.dataset.name = "mnist";
  c.dataset.dir = mnist_dir().string();
  c.epochs = kEpochs;
  c.batch_size = 64;
  c.sgd.learning_rate = 0.01;
  c.sgd.momentum = 0.9;
  c.seed = seed;
  c.subsample_per_class = kPerClass;
  return c;
}

const std::vector<pp::PerturbationSpec>& gaussian_grid() {
  static const auto grid = pp::parse_grid("none;gaussian:0.1,0.2");
  return grid;
}

pp::Dataset mnist_test_set() {
  pp::DatasetConfig dc;
  dc.name = "mnist";
  dc.dir = mnist_dir().string();
  dc.test_limit = kTestImages;
  return pp::load_test_set(dc);
}

fs::path seed_dir(const fs::path& work, std::uint64_t seed) {
  return work / ("seed_" + std::to_string(seed));
}

// Trains B and PB with one seed and writes <model>.ckpt and <model>.csv.
void run_mnist_seed(const fs::path& dir, std::uint64_t seed, const pp::Dataset& test) {
  fs::create_directories(dir);
  for (const char* preset : {"B", "PB"}) {
    pp::TrainConfig c = mnist_config(preset, seed);
    c.checkpoint_path = (dir / (std::string(preset) + ".ckpt")).string();
    pp::TrainResult r = pp::train(c);
    pp::EvalReport report = pp::evaluate(r.model, gaussian_grid(), test,
                                         c.effective_normalization(), kEvalSeed, preset);
    report.config_hash = pp::config_hash(c);
    pp::report_csv(report, dir / (std::string(preset) + ".csv"));
    std::cerr << "seed=" << seed << " model=" << preset << " final_loss=" << r.history.back().loss
              << '\n';
  }
}

Outcome mnist_pipeline(const fs::path& work) {
  Stopwatch clock;
  const pp::Dataset test = mnist_test_set();
  for (std::uint64_t seed : kSeeds) run_mnist_seed(seed_dir(work, seed), seed, test);
  const double t = clock.seconds();
  std::ofstream(work / "pipeline_seconds.txt") << fmt("%.1f\n", t / std::size(kSeeds));
  return {true, fmt("trained B and PB for %zu seeds in %.0f s", std::size(kSeeds), t)};
}

Outcome robustness_trend(const fs::path& work) {
  struct Row {
    double clean_b, clean_pb, gap01, gap02;
  };
  std::vector<Row> rows;
  std::ostringstream notes;
  for (std::uint64_t seed : kSeeds) {
    const auto b = pp::parse_report_csv(seed_dir(work, seed) / "B.csv");
    const auto pb = pp::parse_report_csv(seed_dir(work, seed) / "PB.csv");
    using K = pp::PerturbationKind;
    Row r{b.accuracy(K::kNone), pb.accuracy(K::kNone),
          pb.accuracy(K::kGaussian, 0.1) - b.accuracy(K::kGaussian, 0.1),
          pb.accuracy(K::kGaussian, 0.2) - b.accuracy(K::kGaussian, 0.2)};
    rows.push_back(r);
    notes << fmt("seed %llu: clean B %.2f PB %.2f, s2=0.2 B %.2f PB %.2f; ",
                 static_cast<unsigned long long>(seed), 100 * r.clean_b, 100 * r.clean_pb,
                 100 * b.accuracy(K::kGaussian, 0.2), 100 * pb.accuracy(K::kGaussian, 0.2));
  }
  const Row& first = rows.front();
  const bool clean_ok = first.clean_b >= kCleanFloor && first.clean_pb >= kCleanFloor &&
                        std::abs(first.clean_b - first.clean_pb) <= kCleanGapMax;
  std::vector<double> gaps;
  for (const auto& r : rows) gaps.push_back(r.gap02);
  std::sort(gaps.begin(), gaps.end());
  const double median_gap = gaps[gaps.size() / 2];
  const bool gap_ok = first.gap02 >= kNoiseGapMin || median_gap >= kNoiseGapMin;

  double per_seed_s = 0;
  std::ifstream(work / "pipeline_seconds.txt") >> per_seed_s;
  const bool time_ok = per_seed_s < kPipelineBudgetS;
  return {clean_ok && gap_ok && time_ok,
          fmt("clean ok=%s; PB-B at s2=0.2: seed %llu %+.2f pts, median of %zu seeds %+.2f pts "
              "(need >= %+.0f); pipeline %.0f s per seed (budget %.0f s); ",
              clean_ok ? "yes" : "no", static_cast<unsigned long long>(kSeeds[0]),
              100 * first.gap02, gaps.size(), 100 * median_gap, 100 * kNoiseGapMin, per_seed_s,
              kPipelineBudgetS) +
              notes.str()};
}

Outcome poisson_trend(const fs::path& work) {
  Stopwatch clock;
  const pp::Dataset test = mnist_test_set();
  const auto grid = pp::parse_grid("poisson:0.5,1,2");
  std::map<std::string, pp::EvalReport> reports;
  for (const char* name : {"B", "PB"}) {
    const pp::Checkpoint ckpt = pp::load_checkpoint(seed_dir(work, kSeeds[0]) / (std::string(name) + ".ckpt"));
    pp::Model model = pp::restore_model(ckpt);
    reports[name] = pp::evaluate(model, grid, test, ckpt.normalization, kEvalSeed, name);
  }
  using K = pp::PerturbationKind;
  std::ostringstream cells;
  for (double c : {0.5, 1.0, 2.0}) {
    cells << fmt("C=%g B %.2f PB %.2f; ", c, 100 * reports["B"].accuracy(K::kPoissonAfterContrast, c),
                 100 * reports["PB"].accuracy(K::kPoissonAfterContrast, c));
  }
  const double b2 = reports["B"].accuracy(K::kPoissonAfterContrast, 2.0);
  const double pb2 = reports["PB"].accuracy(K::kPoissonAfterContrast, 2.0);
  const double t = clock.seconds();
  return {pb2 >= b2 && t < kPoissonBudgetS,
          cells.str() + fmt("need PB >= B at C=2; %.1f s (budget %.0f s)", t, kPoissonBudgetS)};
}

Outcome determinism(const fs::path& work) {
  const fs::path again = work / "rerun";
  fs::remove_all(again);
  run_mnist_seed(again, kSeeds[0], mnist_test_set());
  bool same = true;
  for (const char* name : {"B.csv", "PB.csv", "B.ckpt", "PB.ckpt"}) {
    same = same && slurp(again / name) == slurp(seed_dir(work, kSeeds[0]) / name);
  }
  return {same, same ? "rerun with seed 1 reproduced both CSVs and checkpoints byte for byte"
                     : "rerun output differs from the first run"};
}

// C6 --------------------------------------------------------------------

double sample_variance(const std::vector<double>& v) {
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double sq = 0;
  for (double x : v) sq += (x - mean) * (x - mean);
  return sq / static_cast<double>(v.size() - 1);
}

Outcome perturbation_statistics() {
  Stopwatch clock;
  constexpr std::size_t kSide = 1000;  // 10^6 pixels
  const pp::Tensor gray({1, 1, kSide, kSide}, 0.5f);
  bool ok = true;
  std::ostringstream notes;

  for (double s2 : {0.1, 0.2}) {
    pp::Rng a(11), b(11);
    const pp::Tensor out = pp::apply_gaussian(gray, s2, a);
    const auto noise = pp::gaussian_noise(gray.size(), s2, b);
    bool consistent = true;
    for (std::size_t i = 0; i < gray.size(); ++i) {
      consistent = consistent && out[i] == static_cast<float>(std::clamp(0.5 + noise[i], 0.0, 1.0));
    }
    const double var = sample_variance(noise);
    const double rel = std::abs(var - s2) / s2;
    ok = ok && consistent && rel < kVarianceRelTol;
    notes << fmt("gaussian s2=%g var %.5f (%.2f%%); ", s2, var, 100 * rel);
  }
  for (double s2 : {0.1, 0.2}) {
    pp::Rng a(12), b(12);
    const pp::Tensor out = pp::apply_speckle(gray, s2, a);
    const auto n = pp::gaussian_noise(gray.size(), s2, b);
    std::vector<double> diff(n.size());
    bool consistent = true;
    for (std::size_t i = 0; i < n.size(); ++i) {
      diff[i] = 0.5 * n[i];
      consistent = consistent && out[i] == static_cast<float>(std::clamp(0.5 + diff[i], 0.0, 1.0));
    }
    const double var = sample_variance(diff);
    const double rel = std::abs(var - 0.25 * s2) / (0.25 * s2);
    ok = ok && consistent && rel < kVarianceRelTol;
    notes << fmt("speckle s2=%g var %.5f (%.2f%%); ", s2, var, 100 * rel);
  }
  const pp::Tensor img = pp::tensor_cast<float>(oracle::random_tensor({1, 1, kSide, kSide}, 13, 0.0, 1.0));
  for (double c : {0.5, 1.0, 2.0}) {
    const pp::Tensor x = pp::apply_contrast(img, c);
    pp::Rng rng(14);
    double sum = 0, target = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum += static_cast<double>(pp::sample_poisson(x[i] * 255.0, rng)) / 255.0;
      target += x[i];
    }
    const double rel = std::abs(sum / target - 1.0);
    ok = ok && rel < kPoissonMeanRelTol;
    notes << fmt("poisson C=%g mean ratio %.5f; ", c, sum / target);
  }
  const double t = clock.seconds();
  ok = ok && t < kStatsBudgetS;
  return {ok, notes.str() + fmt("tol %.0f%%/%.0f%%; %.1f s (budget %.0f s)", 100 * kVarianceRelTol,
                                100 * kPoissonMeanRelTol, t, kStatsBudgetS)};
}

// C8 --------------------------------------------------------------------

// Ten colored oriented-grating classes with random phase, orientation and
// frequency jitter, a brightness offset and pixel noise.
pp::Dataset synthetic_cifar(std::size_t per_class, std::uint64_t seed) {
  constexpr std::size_t kClasses = 10;
  const std::size_t n = per_class * kClasses;
  pp::Dataset ds;
  ds.name = "cifar10";
  ds.class_count = kClasses;
  ds.images = pp::Tensor({n, 3, 32, 32});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.2);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % kClasses;
    ds.labels.push_back(static_cast<int>(c));
    const double theta = M_PI * static_cast<double>(c % 5) / 5.0 + 0.8 * (u(rng) - 0.5) * M_PI / 5.0;
    const double freq = (c < 5 ? 0.3 : 0.45) * (1.0 + 0.4 * (u(rng) - 0.5));
    const double phase = 2 * M_PI * u(rng);
    const double offset = 0.3 * (u(rng) - 0.5);
    double tint[3];
    for (std::size_t ch = 0; ch < 3; ++ch) {
      tint[ch] = 0.35 + 0.25 * static_cast<double>(c % 3 == ch) + 0.2 * (u(rng) - 0.5);
    }
    for (std::size_t ch = 0; ch < 3; ++ch)
      for (std::size_t y = 0; y < 32; ++y)
        for (std::size_t x = 0; x < 32; ++x) {
          const double t = std::cos(theta) * static_cast<double>(x) + std::sin(theta) * static_cast<double>(y);
          const double v = 0.5 + offset + tint[ch] * std::sin(freq * t + phase) + noise(rng);
          ds.images.at(i, ch, y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
  }
  return ds;
}

Outcome cifar_smoke(const fs::path& work) {
  Stopwatch clock;
  const fs::path dir = work / "cifar";
  fs::create_directories(dir);
  for (int b = 1; b <= 5; ++b) {
    pp::write_cifar_binary(synthetic_cifar(100, 1000 + b), dir / ("data_batch_" + std::to_string(b) + ".bin"));
  }
  pp::write_cifar_binary(synthetic_cifar(100, 2000), dir / "test_batch.bin");

  pp::TrainConfig base;
  base.dataset.name = "cifar10";
  base.dataset.dir = dir.string();
  base.epochs = 5;
  base.batch_size = 64;
  base.sgd.learning_rate = 0.05;
  base.sgd.momentum = 0.9;
  base.sgd.weight_decay = 5e-4;
  base.seed = 1;
  base.subsample_per_class = 500;
  const pp::Dataset test = pp::load_test_set(base.dataset);
  const auto grid = pp::parse_grid("none;gaussian:0.01,0.05;poisson:0.5,2");

  bool ok = true;
  std::ostringstream notes;
  for (bool pushpull : {false, true}) {
    pp::TrainConfig c = base;
    c.model = pp::wideresnet_spec(16, 1, pushpull);
    bool finite = true;
    pp::TrainResult r = pp::train(c, [&](const pp::EpochStats& s) {
      finite = finite && std::isfinite(s.loss);
      std::cerr << c.model.name << " epoch=" << s.epoch << " loss=" << s.loss << '\n';
    });
    pp::EvalReport report = pp::evaluate(r.model, grid, test, c.effective_normalization(), kEvalSeed,
                                         c.model.name);
    report.config_hash = pp::config_hash(c);
    const fs::path csv = dir / (c.model.name + ".csv");
    pp::report_csv(report, csv);
    const pp::EvalReport back = pp::parse_report_csv(csv);
    const bool well_formed = back.records.size() == grid.size() &&
                             pp::report_csv_string(back) == slurp(csv) &&
                             std::all_of(back.records.begin(), back.records.end(), [&](const auto& rec) {
                               return rec.n == test.size() && rec.accuracy >= 0 && rec.accuracy <= 1;
                             });
    ok = ok && finite && well_formed;
    notes << c.model.name << ": loss " << fmt("%.3f", r.history.back().loss);
    for (const auto& rec : back.records) {
      notes << ' ' << pp::to_string(rec.kind);
      if (rec.kind != pp::PerturbationKind::kNone) notes << fmt(":%g", rec.param);
      notes << fmt("=%.2f", 100 * rec.accuracy);
    }
    notes << (finite ? "" : " NON-FINITE LOSS") << (well_formed ? "" : " MALFORMED REPORT") << "; ";
  }
  return {ok, notes.str() + fmt("trend recorded, not gated; %.0f s", clock.seconds())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string which;
  std::string work = "acceptance_work";
  app.add_option("criterion", which,
                 "c1..c8, mnist-pipeline, or all")
      ->required();
  app.add_option("--work", work, "Directory for trained artifacts");
  CLI11_PARSE(app, argc, argv);

  const fs::path dir = fs::absolute(work);
  fs::create_directories(dir);
  const std::map<std::string, std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"c1", {"gradient correctness", gradient_check}},
      {"c2", {"analytic reductions", analytic_reductions}},
      {"c3", {"parameter parity", parameter_parity}},
      {"c4", {"MNIST Gaussian robustness trend", [&] { return robustness_trend(dir); }}},
      {"c5", {"contrast/Poisson trend", [&] { return poisson_trend(dir); }}},
      {"c6", {"perturbation statistics", perturbation_statistics}},
      {"c7", {"determinism", [&] { return determinism(dir); }}},
      {"c8", {"CIFAR smoke run", [&] { return cifar_smoke(dir); }}},
  };

  auto run = [&](const std::string& id) {
    const auto& [title, fn] = criteria.at(id);
    std::string label = id;
    std::transform(label.begin(), label.end(), label.begin(), ::toupper);
    try {
      return report(label, title, fn());
    } catch (const std::exception& e) {
      return report(label, title, {false, std::string("error: ") + e.what()});
    }
  };

  if (which == "mnist-pipeline") {
    try {
      const Outcome o = mnist_pipeline(dir);
      std::cout << "mnist-pipeline: " << o.detail << std::endl;
      return 0;
    } catch (const std::exception& e) {
      std::cout << "mnist-pipeline failed: " << e.what() << std::endl;
      return 1;
    }
  }
  if (which == "all") {
    mnist_pipeline(dir);
    int failures = 0;
    for (const auto& [id, entry] : criteria) failures += run(id);
    return failures == 0 ? 0 : 1;
  }
  if (!criteria.contains(which)) {
    std::cerr << "unknown criterion " << which << '\n';
    return 2;
  }
  return run(which);
}
