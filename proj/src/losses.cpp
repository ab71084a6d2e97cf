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


#include "cmerc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmerc/errors.hpp"
#include "cmerc/ops.hpp"

namespace cmerc::losses {

namespace {

constexpr double kMinProb = 1e-12;

double clamp_prob(double p) { return std::clamp(p, kMinProb, 1.0); }

double focal_derivative(double p, double gamma, FocalForm form) {
  const double q = 1.0 - p;
  if (form == FocalForm::canonical) {
    // d/dp [-(1-p)^γ log p]; the first term vanishes as p -> 1 for γ > 0.
    const double first = (gamma == 0.0 || q == 0.0) ? 0.0 : gamma * std::pow(q, gamma - 1.0) * std::log(p);
    return first - std::pow(q, gamma) / p;
  }
  const double qc = std::max(q, kMinProb);
  return -gamma * std::pow(qc, gamma - 1.0) * p + std::pow(q, gamma);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

}  // namespace

FocalForm parse_focal_form(std::string_view text) {
  if (text == "canonical") return FocalForm::canonical;
  if (text == "printed") return FocalForm::printed;
  throw UsageError("unknown focal_form '" + std::string(text) + "' (canonical|printed)");
}

NceForm parse_nce_form(std::string_view text) {
  if (text == "printed") return NceForm::printed;
  if (text == "standard") return NceForm::standard;
  throw UsageError("unknown nce_form '" + std::string(text) + "' (printed|standard)");
}

std::string_view to_string(FocalForm form) {
  return form == FocalForm::canonical ? "canonical" : "printed";
}

std::string_view to_string(NceForm form) {
  return form == NceForm::printed ? "printed" : "standard";
}

double focal_loss(double p, double gamma, FocalForm form) {
  if (!(gamma >= 0.0)) throw ContractError("focal_loss: gamma must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw ContractError("focal_loss: probability outside [0, 1]");
  const double pc = clamp_prob(p);
  if (form == FocalForm::canonical) return -std::pow(1.0 - pc, gamma) * std::log(pc);
  return std::pow(1.0 - pc, gamma) * pc;
}

Tensor focal_loss(const Tensor& p, double gamma, FocalForm form) {
  if (p.size() != 1) throw ShapeError("focal_loss expects a 1x1 probability, got " + p.shape().str());
  if (!(gamma >= 0.0)) throw ContractError("focal_loss: gamma must be >= 0");
  return map_elementwise(
      p, [gamma, form](double x) { return focal_loss(x, gamma, form); },
      [gamma, form](double x) {
        // Below the clamp the forward value is constant.
        if (x < kMinProb) return 0.0;
        return focal_derivative(x, gamma, form);
      },
      "focal_loss");
}

double averaged_focal(const std::vector<std::vector<double>>& true_class_probs, double gamma,
                      FocalForm form) {
  if (true_class_probs.empty() || true_class_probs.front().empty()) {
    throw ContractError("averaged_focal: empty batch");
  }
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& mode : true_class_probs) {
    for (double p : mode) {
      total += focal_loss(p, gamma, form);
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

Tensor averaged_focal(const std::vector<std::vector<Tensor>>& probs,
                      std::span<const std::size_t> labels, double gamma, FocalForm form) {
  if (probs.empty() || labels.empty()) throw ContractError("averaged_focal: empty batch");
  std::vector<Tensor> terms;
  for (const auto& mode : probs) {
    if (mode.size() != labels.size()) {
      throw ContractError("averaged_focal: probability and label counts differ");
    }
    for (std::size_t j = 0; j < mode.size(); ++j) {
      terms.push_back(focal_loss(pick(mode[j], 0, labels[j]), gamma, form));
    }
  }
  return scale(add_n(terms), 1.0 / static_cast<double>(terms.size()));
}

Tensor candidate_probabilities(const Tensor& query, std::span<const Tensor> candidates, double tau) {
  if (!(tau > 0.0)) throw ContractError("temperature must be positive");
  if (candidates.empty()) throw ContractError("candidate_probabilities: no candidates");
  std::vector<Tensor> sims;
  sims.reserve(candidates.size());
  for (const auto& c : candidates) sims.push_back(cosine_similarity(query, c));
  return softmax_rows(scale(concat_cols(sims), 1.0 / tau));
}

double pair_probability(std::span<const double> query, std::span<const double> key,
                        std::span<const std::vector<double>> negatives, double tau) {
  if (!(tau > 0.0)) throw ContractError("temperature must be positive");
  std::vector<double> logits{cosine(query, key) / tau};
  for (const auto& n : negatives) logits.push_back(cosine(query, n) / tau);
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double l : logits) total += std::exp(l - mx);
  return std::exp(logits[0] - mx) / total;
}

Tensor nce_loss(const Tensor& query, const Tensor& positive, std::span<const Tensor> negatives,
                double nu, double tau, NceForm form) {
  if (negatives.empty()) throw ContractError("nce_loss: negative set is empty");
  if (!(nu > 0.0)) throw ContractError("nce_loss: nu must be positive");
  std::vector<Tensor> candidates;
  candidates.reserve(negatives.size() + 1);
  candidates.push_back(positive);
  candidates.insert(candidates.end(), negatives.begin(), negatives.end());
  const Tensor probs = candidate_probabilities(query, candidates, tau);
  const Tensor shifted = add_scalar(probs, nu);
  const std::size_t k = candidates.size();
  if (form == NceForm::printed) {
    // log(P / (P + ν)) per candidate, weighted -1 for the positive and +1 for negatives.
    const Tensor ratio = sub(log(probs), log(shifted));
    std::vector<double> signs(k, 1.0);
    signs[0] = -1.0;
    return add_scalar(dot(ratio, Tensor::row(signs)), -1.0);
  }
  const Tensor log_shifted = log(shifted);
  // -log P+ + log(P+ + ν) - Σ_k [log ν - log(Pk + ν)]
  const Tensor positive_term = sub(pick(log_shifted, 0, 0), log(pick(probs, 0, 0)));
  std::vector<double> mask(k, 1.0);
  mask[0] = 0.0;
  const Tensor negative_term = dot(log_shifted, Tensor::row(mask));
  const double constant = -static_cast<double>(k - 1) * std::log(nu);
  return add_scalar(add(positive_term, negative_term), constant);
}

std::vector<std::vector<std::size_t>> sample_negatives(std::size_t batch, std::size_t per_anchor,
                                                       Rng& rng) {
  std::vector<std::vector<std::size_t>> out(batch);
  if (batch < 2 || per_anchor == 0) return out;
  const std::size_t take = std::min(per_anchor, batch - 1);
  for (std::size_t j = 0; j < batch; ++j) {
    std::vector<std::size_t> pool;
    pool.reserve(batch - 1);
    for (std::size_t k = 0; k < batch; ++k) {
      if (k != j) pool.push_back(k);
    }
    // Partial Fisher-Yates: the first `take` slots form the sample.
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
    }
    pool.resize(take);
    out[j] = std::move(pool);
  }
  return out;
}

Tensor ace_loss(const std::vector<std::vector<Tensor>>& descriptors,
                const std::vector<std::vector<std::size_t>>& negatives, std::size_t pool_size,
                double tau, NceForm form) {
  if (descriptors.empty()) throw ContractError("ace_loss: empty batch");
  if (negatives.size() != descriptors.size()) {
    throw ContractError("ace_loss: one negative set per sample is required");
  }
  if (pool_size == 0) throw ContractError("ace_loss: pool size must be positive");
  const std::size_t modes = descriptors.front().size();
  if (modes < 2) throw ContractError("ace_loss: needs at least two modes");
  std::vector<Tensor> per_sample;
  per_sample.reserve(descriptors.size());
  for (std::size_t j = 0; j < descriptors.size(); ++j) {
    const auto& negs = negatives[j];
    if (negs.empty()) throw ContractError("ace_loss: sample " + std::to_string(j) + " has no negatives");
    const double nu = static_cast<double>(negs.size()) / static_cast<double>(pool_size);
    std::vector<Tensor> pair_terms;
    for (std::size_t m = 0; m < modes; ++m) {
      for (std::size_t mi = 0; mi < modes; ++mi) {
        if (m == mi) continue;
        std::vector<Tensor> neg_keys;
        neg_keys.reserve(negs.size());
        for (std::size_t k : negs) {
          if (k == j || k >= descriptors.size()) {
            throw ContractError("ace_loss: invalid negative index " + std::to_string(k));
          }
          neg_keys.push_back(descriptors[k][mi]);
        }
        pair_terms.push_back(nce_loss(descriptors[j][m], descriptors[j][mi], neg_keys, nu, tau, form));
      }
    }
    per_sample.push_back(scale(add_n(pair_terms), 1.0 / static_cast<double>(modes)));
  }
  return scale(add_n(per_sample), 1.0 / static_cast<double>(per_sample.size()));
}

LossReport combined_loss(const Tensor& ace, const Tensor& focal, std::vector<double> focal_per_mode) {
  LossReport report;
  report.total = add(ace, focal);
  report.ace = ace.item();
  report.focal = focal.item();
  report.total_value = report.total.item();
  report.focal_per_mode = std::move(focal_per_mode);
  return report;
}

}  // namespace cmerc::losses
