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


#include "cmerc/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmerc/errors.hpp"
#include "cmerc/ops.hpp"

namespace cmerc::fusion {

namespace {

void require_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ContractError(std::string(what) + " must lie in [0, 1], got " + std::to_string(v));
  }
}

}  // namespace

std::array<double, 3> compose_alphas(double alpha_prime_1, double alpha_prime_2) {
  require_unit(alpha_prime_1, "alpha_prime_1");
  require_unit(alpha_prime_2, "alpha_prime_2");
  return {alpha_prime_1 * alpha_prime_2, alpha_prime_2 * (1.0 - alpha_prime_1),
          1.0 - alpha_prime_2};
}

PairwiseAlphas bridge_pairwise(std::span<const double> mode_weights) {
  const std::size_t n = mode_weights.size();
  PairwiseAlphas out(n, std::vector<double>(n, 0.0));
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i == m) continue;
      const double total = mode_weights[m] + mode_weights[i];
      out[m][i] = total > 0.0 ? mode_weights[m] / total : 0.5;
    }
  }
  return out;
}

AlphaState AlphaState::from_primes(double alpha_prime_1, double alpha_prime_2, double epsilon,
                                   double momentum) {
  AlphaState s;
  s.alpha_prime_1 = alpha_prime_1;
  s.alpha_prime_2 = alpha_prime_2;
  s.composed = compose_alphas(alpha_prime_1, alpha_prime_2);
  s.pairwise = bridge_pairwise(s.composed);
  s.epsilon = epsilon;
  s.momentum = momentum;
  s.validate();
  return s;
}

AlphaState AlphaState::uniform(double value, double epsilon, double momentum) {
  AlphaState s = from_primes(0.5, 0.5, epsilon, momentum);
  require_unit(value, "uniform alpha");
  for (std::size_t m = 0; m < s.pairwise.size(); ++m)
    for (std::size_t i = 0; i < s.pairwise.size(); ++i)
      if (i != m) s.pairwise[m][i] = value;
  return s;
}

void AlphaState::validate() const {
  require_unit(alpha_prime_1, "alpha_prime_1");
  require_unit(alpha_prime_2, "alpha_prime_2");
  if (!(epsilon > 0.0)) throw ContractError("alpha epsilon must be positive");
  if (!(momentum >= 0.0 && momentum <= 1.0)) throw ContractError("alpha momentum must lie in [0, 1]");
  for (std::size_t m = 0; m < pairwise.size(); ++m) {
    if (pairwise[m].size() != pairwise.size()) throw ContractError("pairwise alphas must be square");
    for (std::size_t i = 0; i < pairwise.size(); ++i) {
      if (i != m) require_unit(pairwise[m][i], "pairwise alpha");
    }
  }
}

Tensor adaptive_fuse(std::span<const Tensor> descriptors, const PairwiseAlphas& alphas) {
  const std::size_t n = descriptors.size();
  if (n < 2) throw ContractError("adaptive_fuse needs at least two modes");
  if (alphas.size() != n) {
    throw ContractError("adaptive_fuse: " + std::to_string(n) + " descriptors but alphas for " +
                        std::to_string(alphas.size()) + " modes");
  }
  for (const auto& d : descriptors) {
    if (!d.defined()) throw ContractError("adaptive_fuse: missing mode descriptor");
    if (d.shape() != descriptors.front().shape() || d.rows() != 1) {
      throw ShapeError("adaptive_fuse: descriptors must be equal-width rows, got " +
                       descriptors.front().shape().str() + " and " + d.shape().str());
    }
  }
  const double inv_modes = 1.0 / static_cast<double>(n);
  std::vector<Tensor> blocks;
  blocks.reserve(n);
  for (std::size_t m = 0; m < n; ++m) {
    std::vector<Tensor> terms;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == m) continue;
      const double a = alphas[m][i];
      require_unit(a, "pairwise alpha");
      terms.push_back(add(scale(descriptors[m], a), scale(descriptors[i], 1.0 - a)));
    }
    blocks.push_back(scale(add_n(terms), inv_modes));
  }
  return concat_cols(blocks);
}

Tensor adaptive_fuse(std::span<const Tensor> descriptors, const AlphaState& alphas) {
  return adaptive_fuse(descriptors, alphas.pairwise);
}

double estimate_alpha_pair(std::span<const double> f_a, std::span<const double> f_b,
                           std::span<const double> grad_b, double epsilon) {
  if (!(epsilon > 0.0)) throw ContractError("estimate_alpha_pair: epsilon must be positive");
  if (f_a.size() != f_b.size() || f_b.size() != grad_b.size() || f_a.empty()) {
    throw ShapeError("estimate_alpha_pair: operand widths differ");
  }
  double diff_sq = 0.0, grad_sq = 0.0;
  for (std::size_t k = 0; k < f_a.size(); ++k) {
    const double d = f_a[k] - f_b[k];
    diff_sq += d * d;
    grad_sq += grad_b[k] * grad_b[k];
  }
  if (grad_sq == 0.0) return 0.0;
  if (diff_sq == 0.0) return 0.5;
  const double factor = epsilon * std::sqrt(diff_sq) / std::sqrt(grad_sq);
  double total = 0.0;
  for (std::size_t k = 0; k < f_a.size(); ++k) {
    const double d = f_a[k] - f_b[k];
    const double g = grad_b[k];
    double entry;
    if (g == 0.0) {
      entry = 0.0;
    } else if (d == 0.0) {
      // ±infinity before clamping.
      entry = g > 0.0 ? 1.0 : 0.0;
    } else {
      entry = std::clamp(factor * g / d, 0.0, 1.0);
    }
    total += entry;
  }
  return total / static_cast<double>(f_a.size());
}

AlphaEstimate estimate_sample_alphas(std::span<const std::vector<double>> descriptors,
                                     const DescriptorGradient& gradient, double epsilon) {
  if (descriptors.size() != 3) throw ContractError("pairwise alpha estimation needs three modes");
  const auto& f1 = descriptors[0];
  const auto& f2 = descriptors[1];
  const auto& f3 = descriptors[2];
  AlphaEstimate est;
  est.alpha_prime_1 = estimate_alpha_pair(f1, f2, gradient(1, f2), epsilon);
  std::vector<double> mixed(f1.size());
  for (std::size_t k = 0; k < f1.size(); ++k) {
    mixed[k] = est.alpha_prime_1 * f1[k] + (1.0 - est.alpha_prime_1) * f2[k];
  }
  est.alpha_prime_2 = estimate_alpha_pair(mixed, f3, gradient(2, f3), epsilon);
  return est;
}

AlphaState update_alphas(const AlphaState& current, std::span<const AlphaEstimate> estimates) {
  if (estimates.empty()) throw ContractError("update_alphas: no estimates");
  if (current.momentum == 1.0) return current;
  double a1 = 0.0, a2 = 0.0;
  for (const auto& e : estimates) {
    a1 += e.alpha_prime_1;
    a2 += e.alpha_prime_2;
  }
  a1 /= static_cast<double>(estimates.size());
  a2 /= static_cast<double>(estimates.size());
  const double mom = current.momentum;
  const double next1 = std::clamp(mom * current.alpha_prime_1 + (1.0 - mom) * a1, 0.0, 1.0);
  const double next2 = std::clamp(mom * current.alpha_prime_2 + (1.0 - mom) * a2, 0.0, 1.0);
  return AlphaState::from_primes(next1, next2, current.epsilon, current.momentum);
}

std::vector<std::size_t> select_informative_samples(AlphaProbe& probe, const AlphaState& current,
                                                    std::size_t budget, Rng& rng) {
  if (budget == 0) throw ContractError("select_informative_samples: budget must be >= 1");
  if (probe.size() == 0) throw ContractError("select_informative_samples: empty validation set");
  std::vector<std::size_t> informative;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const AlphaEstimate est = probe.estimate(i);
    const AlphaState stepped = update_alphas(current, std::span(&est, 1));
    if (probe.predict(i, stepped) != probe.predict(i, current)) informative.push_back(i);
  }
  rng.shuffle(informative);
  if (informative.size() > budget) informative.resize(budget);
  return informative;
}

}  // namespace cmerc::fusion
