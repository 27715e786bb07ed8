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

#ifndef PUSHPULL_PERTURB_HPP_
#define PUSHPULL_PERTURB_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pushpull/tensor.hpp"

// Test-time corruptions of images with pixel values in [0, 1]. Every
// function is a pure function of its inputs and the rng state, and every
// output is clamped back into [0, 1].
namespace pushpull {

using Rng = std::mt19937_64;

enum class PerturbationKind {
  kNone,
  kGaussian,
  kSpeckle,
  kContrast,
  kPoissonAfterContrast,
};

std::string_view to_string(PerturbationKind kind);
PerturbationKind parse_perturbation_kind(std::string_view s);

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::kNone;
  double variance = 0.0;  // gaussian, speckle
  double contrast = 1.0;  // contrast, poisson-after-contrast
  std::uint64_t seed = 0;
  int poisson_peak = 255;

  void validate() const;

  // The swept value: variance for noise kinds, contrast for contrast kinds,
  // zero for kNone.
  double parameter() const;

  static PerturbationSpec none();
  static PerturbationSpec gaussian(double variance);
  static PerturbationSpec speckle(double variance);
  static PerturbationSpec contrast_change(double c);
  static PerturbationSpec poisson_after_contrast(double c, int peak = 255);
};

// i.i.d. Normal(0, variance) draws; the noise field apply_gaussian adds.
std::vector<double> gaussian_noise(std::size_t n, double variance, Rng& rng);

// Inverse-transform sampling for lambda < 30, rounded normal approximation
// otherwise.
std::int64_t sample_poisson(double lambda, Rng& rng);

// clamp(image + n), n ~ N(0, variance)
Tensor apply_gaussian(const Tensor& image, double variance, Rng& rng);

// clamp(image + image * n), n ~ N(0, variance)
Tensor apply_speckle(const Tensor& image, double variance, Rng& rng);

// clamp((image - 0.5) * c + 0.5)
Tensor apply_contrast(const Tensor& image, double c);

// clamp(Poisson(contrast(image) * peak) / peak)
Tensor apply_poisson_after_contrast(const Tensor& image, double c, Rng& rng,
                                    int peak = 255);

Tensor apply_perturbation(const Tensor& image, const PerturbationSpec& spec,
                          Rng& rng);

// Seed for one image of one grid cell, independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t master, PerturbationKind kind,
                          double parameter, std::uint64_t image_index);

// Grid syntax: cells separated by ';', each "kind" or "kind:v1,v2,...",
// e.g. "none;gaussian:0.1,0.2;poisson:0.5,1,2".
std::vector<PerturbationSpec> parse_grid(std::string_view text,
                                         int poisson_peak = 255);

}  // namespace pushpull

#endif  // PUSHPULL_PERTURB_HPP_
