/*
 * Copyright 2026 The cmerc Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "cmerc/rng.hpp"
#include "cmerc/tensor.hpp"

// Adaptive fusion of the cross-attended descriptors and the gradient-based
// estimation of its interpolation coefficients.
namespace cmerc::fusion {

using PairwiseAlphas = std::vector<std::vector<double>>;  // [central][peripheral]

// Interpolation coefficients. alpha_prime_1 mixes modes 1 and 2,
// alpha_prime_2 mixes that result with mode 3; `composed` holds the implied
// per-mode weights and `pairwise` the coefficients the fusion consumes.
struct AlphaState {
  double alpha_prime_1 = 0.5;
  double alpha_prime_2 = 0.5;
  std::array<double, 3> composed{0.25, 0.25, 0.5};
  PairwiseAlphas pairwise;
  double epsilon = 0.1;
  double momentum = 0.9;

  static AlphaState from_primes(double alpha_prime_1, double alpha_prime_2, double epsilon = 0.1,
                                double momentum = 0.9);
  // Every pairwise coefficient set to `value` (the all-equal setting).
  static AlphaState uniform(double value, double epsilon = 0.1, double momentum = 0.9);

  void validate() const;
};

// (α'₁α'₂, α'₂(1-α'₁), 1-α'₂); inputs must lie in [0, 1].
std::array<double, 3> compose_alphas(double alpha_prime_1, double alpha_prime_2);

// α^m_{mi} = w_m / (w_m + w_mi), or 0.5 when both weights are zero.
PairwiseAlphas bridge_pairwise(std::span<const double> mode_weights);

// Block m = (1/|M|) Σ_{mi≠m} [α^m_{mi} f_m + (1 - α^m_{mi}) f_mi], blocks
// concatenated in mode order. Descriptors are 1×d rows of equal width.
Tensor adaptive_fuse(std::span<const Tensor> descriptors, const PairwiseAlphas& alphas);
Tensor adaptive_fuse(std::span<const Tensor> descriptors, const AlphaState& alphas);

// Scalar interpolation coefficient from the element-wise estimate
//   α* = ε ‖f_a - f_b‖ grad_b / ‖grad_b‖ ⊘ (f_a - f_b)
// reduced by the mean of its entries clamped to [0, 1]. A zero gradient gives
// 0 and identical descriptors give 0.5.
double estimate_alpha_pair(std::span<const double> f_a, std::span<const double> f_b,
                           std::span<const double> grad_b, double epsilon);

struct AlphaEstimate {
  double alpha_prime_1 = 0.5;
  double alpha_prime_2 = 0.5;
};

// Gradient of the classification loss of mode `mode`'s head with respect to
// its input descriptor, evaluated at `descriptor`.
using DescriptorGradient =
    std::function<std::vector<double>(std::size_t mode, std::span<const double> descriptor)>;

// Pairwise estimation for one sample: α'₁ from (f₁, f₂), then α'₂ from
// (α'₁ f₁ + (1 - α'₁) f₂, f₃).
AlphaEstimate estimate_sample_alphas(std::span<const std::vector<double>> descriptors,
                                     const DescriptorGradient& gradient, double epsilon);

// Exponential moving average of the batch-mean estimate with the state's
// momentum, followed by recomposition.
AlphaState update_alphas(const AlphaState& current, std::span<const AlphaEstimate> estimates);

// Model access needed to find informative validation samples.
class AlphaProbe {
 public:
  virtual ~AlphaProbe() = default;
  virtual std::size_t size() const = 0;
  virtual AlphaEstimate estimate(std::size_t sample) = 0;
  virtual std::size_t predict(std::size_t sample, const AlphaState& alphas) = 0;
};

// Samples whose predicted label changes when the current coefficients take a
// single-sample update step toward that sample's own estimate. Returns up to
// `budget` of them in random order.
std::vector<std::size_t> select_informative_samples(AlphaProbe& probe, const AlphaState& current,
                                                    std::size_t budget, Rng& rng);

}  // namespace cmerc::fusion
