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

#include "pushpull/perturb.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>

namespace pushpull {
namespace {

float clamp01(double v) {
  return static_cast<float>(std::clamp(v, 0.0, 1.0));
}

void require_variance(double variance, const char* op) {
  if (!(variance >= 0) || !std::isfinite(variance)) {
    fail(ErrorCode::kInvalidArgument, std::string(op) +
                                          ": variance must be >= 0, got " +
                                          std::to_string(variance));
  }
}

void require_contrast(double c, const char* op) {
  if (!(c > 0) || !std::isfinite(c)) {
    fail(ErrorCode::kInvalidArgument,
         std::string(op) + ": contrast must be > 0, got " + std::to_string(c));
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(ErrorCode::kFormat, "grid: cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string_view to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::kNone: return "none";
    case PerturbationKind::kGaussian: return "gaussian";
    case PerturbationKind::kSpeckle: return "speckle";
    case PerturbationKind::kContrast: return "contrast";
    case PerturbationKind::kPoissonAfterContrast: return "poisson";
  }
  return "none";
}

PerturbationKind parse_perturbation_kind(std::string_view s) {
  s = trim(s);
  if (s == "none") return PerturbationKind::kNone;
  if (s == "gaussian") return PerturbationKind::kGaussian;
  if (s == "speckle") return PerturbationKind::kSpeckle;
  if (s == "contrast") return PerturbationKind::kContrast;
  if (s == "poisson" || s == "poisson-after-contrast") {
    return PerturbationKind::kPoissonAfterContrast;
  }
  fail(ErrorCode::kFormat, "unknown perturbation kind '" + std::string(s) + "'");
}

void PerturbationSpec::validate() const {
  switch (kind) {
    case PerturbationKind::kNone:
      return;
    case PerturbationKind::kGaussian:
    case PerturbationKind::kSpeckle:
      require_variance(variance, "perturbation");
      return;
    case PerturbationKind::kPoissonAfterContrast:
      if (poisson_peak <= 0) {
        fail(ErrorCode::kInvalidArgument,
             "perturbation: poisson peak must be > 0, got " +
                 std::to_string(poisson_peak));
      }
      [[fallthrough]];
    case PerturbationKind::kContrast:
      require_contrast(contrast, "perturbation");
      return;
  }
}

double PerturbationSpec::parameter() const {
  switch (kind) {
    case PerturbationKind::kGaussian:
    case PerturbationKind::kSpeckle:
      return variance;
    case PerturbationKind::kContrast:
    case PerturbationKind::kPoissonAfterContrast:
      return contrast;
    case PerturbationKind::kNone:
      break;
  }
  return 0.0;
}

PerturbationSpec PerturbationSpec::none() { return {}; }

PerturbationSpec PerturbationSpec::gaussian(double variance) {
  PerturbationSpec s;
  s.kind = PerturbationKind::kGaussian;
  s.variance = variance;
  return s;
}

PerturbationSpec PerturbationSpec::speckle(double variance) {
  PerturbationSpec s;
  s.kind = PerturbationKind::kSpeckle;
  s.variance = variance;
  return s;
}

PerturbationSpec PerturbationSpec::contrast_change(double c) {
  PerturbationSpec s;
  s.kind = PerturbationKind::kContrast;
  s.contrast = c;
  return s;
}

PerturbationSpec PerturbationSpec::poisson_after_contrast(double c, int peak) {
  PerturbationSpec s;
  s.kind = PerturbationKind::kPoissonAfterContrast;
  s.contrast = c;
  s.poisson_peak = peak;
  return s;
}

std::vector<double> gaussian_noise(std::size_t n, double variance, Rng& rng) {
  require_variance(variance, "gaussian_noise");
  std::vector<double> out(n, 0.0);
  if (variance == 0) return out;
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  for (auto& v : out) v = normal(rng);
  return out;
}

std::int64_t sample_poisson(double lambda, Rng& rng) {
  if (!(lambda >= 0) || !std::isfinite(lambda)) {
    fail(ErrorCode::kInvalidArgument,
         "poisson: rate must be >= 0, got " + std::to_string(lambda));
  }
  if (lambda == 0) return 0;
  if (lambda < 30) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double u = uniform(rng);
    double p = std::exp(-lambda);
    double cdf = p;
    std::int64_t k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= lambda / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  std::normal_distribution<double> normal(lambda, std::sqrt(lambda));
  return std::max<std::int64_t>(0, std::llround(normal(rng)));
}

Tensor apply_gaussian(const Tensor& image, double variance, Rng& rng) {
  require_variance(variance, "apply_gaussian");
  if (variance == 0) return image;
  const auto noise = gaussian_noise(image.size(), variance, rng);
  Tensor out(image.shape());
  for (std::size_t i = 0; i < image.size(); ++i) {
    out[i] = clamp01(static_cast<double>(image[i]) + noise[i]);
  }
  return out;
}

Tensor apply_speckle(const Tensor& image, double variance, Rng& rng) {
  require_variance(variance, "apply_speckle");
  if (variance == 0) return image;
  const auto noise = gaussian_noise(image.size(), variance, rng);
  Tensor out(image.shape());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double x = image[i];
    out[i] = clamp01(x + x * noise[i]);
  }
  return out;
}

Tensor apply_contrast(const Tensor& image, double c) {
  require_contrast(c, "apply_contrast");
  if (c == 1) return image;
  Tensor out(image.shape());
  for (std::size_t i = 0; i < image.size(); ++i) {
    out[i] = clamp01((static_cast<double>(image[i]) - 0.5) * c + 0.5);
  }
  return out;
}

Tensor apply_poisson_after_contrast(const Tensor& image, double c, Rng& rng,
                                    int peak) {
  if (peak <= 0) {
    fail(ErrorCode::kInvalidArgument,
         "apply_poisson_after_contrast: peak must be > 0, got " +
             std::to_string(peak));
  }
  const Tensor x = apply_contrast(image, c);
  const auto scale = static_cast<double>(peak);
  Tensor out(image.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto count = sample_poisson(static_cast<double>(x[i]) * scale, rng);
    out[i] = clamp01(static_cast<double>(count) / scale);
  }
  return out;
}

Tensor apply_perturbation(const Tensor& image, const PerturbationSpec& spec,
                          Rng& rng) {
  spec.validate();
  switch (spec.kind) {
    case PerturbationKind::kNone:
      return image;
    case PerturbationKind::kGaussian:
      return apply_gaussian(image, spec.variance, rng);
    case PerturbationKind::kSpeckle:
      return apply_speckle(image, spec.variance, rng);
    case PerturbationKind::kContrast:
      return apply_contrast(image, spec.contrast);
    case PerturbationKind::kPoissonAfterContrast:
      return apply_poisson_after_contrast(image, spec.contrast, rng,
                                          spec.poisson_peak);
  }
  return image;
}

std::uint64_t derive_seed(std::uint64_t master, PerturbationKind kind,
                          double parameter, std::uint64_t image_index) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(kind));
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(parameter));
  return splitmix64(h ^ image_index);
}

std::vector<PerturbationSpec> parse_grid(std::string_view text,
                                         int poisson_peak) {
  std::vector<PerturbationSpec> grid;
  while (!text.empty()) {
    const auto semi = text.find(';');
    std::string_view cell = trim(text.substr(0, semi));
    text = semi == std::string_view::npos ? std::string_view{}
                                          : text.substr(semi + 1);
    if (cell.empty()) continue;
    const auto colon = cell.find(':');
    const PerturbationKind kind = parse_perturbation_kind(cell.substr(0, colon));
    if (kind == PerturbationKind::kNone) {
      grid.push_back(PerturbationSpec::none());
      continue;
    }
    if (colon == std::string_view::npos) {
      fail(ErrorCode::kFormat, "grid: '" + std::string(cell) +
                                   "' needs values, e.g. gaussian:0.1,0.2");
    }
    std::string_view values = cell.substr(colon + 1);
    while (!values.empty()) {
      const auto comma = values.find(',');
      const double v = parse_double(values.substr(0, comma));
      values = comma == std::string_view::npos ? std::string_view{}
                                               : values.substr(comma + 1);
      PerturbationSpec s;
      s.kind = kind;
      s.poisson_peak = poisson_peak;
      if (kind == PerturbationKind::kGaussian ||
          kind == PerturbationKind::kSpeckle) {
        s.variance = v;
      } else {
        s.contrast = v;
      }
      s.validate();
      grid.push_back(s);
    }
  }
  return grid;
}

}  // namespace pushpull
