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

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "cmerc/rng.hpp"
#include "cmerc/tensor.hpp"

// Training objectives of the cross-modal network: the aggregated
// noise-contrastive term, the averaged focal term, and their sum.
namespace cmerc::losses {

// canonical: -(1-p)^γ log p.  printed: (1-p)^γ p, kept for fidelity runs.
enum class FocalForm { canonical, printed };
// printed: -log(P+/(P++ν)) + Σ log(Pk/(Pk+ν)) - 1.
// standard: -log(P+/(P++ν)) - Σ log(ν/(Pk+ν)).
enum class NceForm { printed, standard };

FocalForm parse_focal_form(std::string_view text);
NceForm parse_nce_form(std::string_view text);
std::string_view to_string(FocalForm form);
std::string_view to_string(NceForm form);

// p is clamped to [1e-12, 1] before use.
double focal_loss(double p, double gamma, FocalForm form = FocalForm::canonical);
// Differentiable form on a 1×1 probability.
Tensor focal_loss(const Tensor& p, double gamma, FocalForm form = FocalForm::canonical);

// Mean of focal_loss over modes and samples; probs[m][j] is the probability
// mode m's head assigns to sample j's true class.
double averaged_focal(const std::vector<std::vector<double>>& true_class_probs, double gamma,
                      FocalForm form = FocalForm::canonical);
// Differentiable form: probs[m][j] is a 1×C distribution, labels[j] the class.
Tensor averaged_focal(const std::vector<std::vector<Tensor>>& probs,
                      std::span<const std::size_t> labels, double gamma,
                      FocalForm form = FocalForm::canonical);

// exp(cos(query, c)/τ) normalized over the candidates, as a 1×K row. The
// positive key is conventionally candidates[0].
Tensor candidate_probabilities(const Tensor& query, std::span<const Tensor> candidates, double tau);
// Probability of `key` when it is the only candidate paired with `negatives`.
double pair_probability(std::span<const double> query, std::span<const double> key,
                        std::span<const std::vector<double>> negatives, double tau);

// Contrastive term for one ordered mode pair of one sample. `nu` is
// |N_j| / |N|.
Tensor nce_loss(const Tensor& query, const Tensor& positive, std::span<const Tensor> negatives,
                double nu, double tau, NceForm form = NceForm::printed);

// negatives[j] lists sample indices, never j itself, drawn uniformly without
// replacement; min(per_anchor, batch - 1) per anchor.
std::vector<std::vector<std::size_t>> sample_negatives(std::size_t batch, std::size_t per_anchor,
                                                       Rng& rng);

// (1/|D|) Σ_j (1/|M|) Σ_{m≠mi} nce_loss(f^m_j, f^mi_j, {f^mi_k : k ∈ N_j}).
// descriptors[j][m] is sample j's cross-attended descriptor of mode m, and
// pool_size is |N| (the training-set size) used for ν.
Tensor ace_loss(const std::vector<std::vector<Tensor>>& descriptors,
                const std::vector<std::vector<std::size_t>>& negatives, std::size_t pool_size,
                double tau, NceForm form = NceForm::printed);

struct LossReport {
  Tensor total;
  double ace = 0.0;
  double focal = 0.0;
  double total_value = 0.0;
  std::vector<double> focal_per_mode;
};

LossReport combined_loss(const Tensor& ace, const Tensor& focal,
                         std::vector<double> focal_per_mode = {});

}  // namespace cmerc::losses
