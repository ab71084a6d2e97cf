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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cmerc/modes.hpp"

// Local surrogate explanations over mode-tagged groups of the fused
// descriptor: mask groups at random, query the frozen model, and fit a
// locality-weighted ridge regression of the predicted-class probability on
// the mask.
namespace cmerc::explain {

struct FeatureGroup {
  std::string name;
  Mode mode = Mode::text;
  std::size_t begin = 0;
  std::size_t width = 0;
};

// One group per mode block of width `mode_width`, or sub-blocks of
// `sub_width` columns when it is nonzero (the last one may be narrower).
std::vector<FeatureGroup> mode_groups(std::size_t mode_width, std::size_t sub_width = 0);

struct PerturbationConfig {
  std::size_t num_samples = 1000;
  double mask_prob = 0.5;     // chance that a group is zeroed
  double kernel_width = 0.0;  // 0 selects 0.75·sqrt(group count)
  double ridge_lambda = 1e-3;
  std::uint64_t seed = 7;

  double kernel_for(std::size_t groups) const;
  void validate(std::size_t groups) const;
};

// Class probabilities of the black-box model for one (masked) instance.
using Scorer = std::function<std::vector<double>(std::span<const double> instance)>;

struct PerturbationSet {
  std::size_t target_class = 0;
  std::vector<double> original_probs;
  // masks[i][g] is 1 when group g is kept. Row 0 is the unmasked instance.
  std::vector<std::vector<std::uint8_t>> masks;
  std::vector<double> scores;   // probability of target_class
  std::vector<double> weights;  // exp(-hamming² / kernel²)
  double kernel_width = 0.0;
};

PerturbationSet perturb_and_score(std::span<const double> instance,
                                  std::span<const FeatureGroup> groups, const Scorer& scorer,
                                  const PerturbationConfig& config);

struct Explanation {
  std::string utterance_id;
  std::size_t predicted_label = 0;
  std::vector<std::string> group_names;
  std::vector<double> attributions;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t num_samples = 0;
  double kernel_width = 0.0;
  double ridge_lambda = 0.0;  // value actually used
  std::vector<std::string> warnings;
};

// Weighted ridge with an unpenalized intercept. A singular system raises
// λ tenfold until it factors, recording a warning.
Explanation fit_surrogate(const PerturbationSet& set, std::span<const FeatureGroup> groups,
                          double ridge_lambda);

std::string explanation_json(const Explanation& e);
Explanation explanation_from_json(const std::string& text);
std::string explanation_svg(const Explanation& e);

// Writes <id>.json and <id>.svg per explanation plus index.json.
void render_report(std::span<const Explanation> explanations, const std::filesystem::path& out_dir);

}  // namespace cmerc::explain
