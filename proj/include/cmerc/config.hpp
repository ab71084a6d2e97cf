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
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cmerc/data.hpp"
#include "cmerc/losses.hpp"

// Flat `key = value` run configuration. Blank lines and `#` comments are
// ignored; unknown keys are rejected.
namespace cmerc {

enum class AlphaMode { learned, fixed, random };

AlphaMode parse_alpha_mode(std::string_view text);
std::string_view to_string(AlphaMode mode);

struct RunConfig {
  // Architecture. Stream widths of 0 are taken from the data.
  std::size_t num_classes = 4;
  data::StreamDims stream_dims{0, 0, 0, 0};
  std::size_t lstm_hidden = 8;
  std::size_t encoder_dim = 8;
  std::size_t attention_layers = 2;
  std::size_t man_layers = 4;
  std::size_t man_width = 8;
  std::size_t heads = 2;
  std::size_t context_hidden = 8;
  std::size_t context_dim = 8;

  // Objectives.
  double gamma = 1.0;
  double tau = 0.1;
  losses::FocalForm focal_form = losses::FocalForm::canonical;
  losses::NceForm nce_form = losses::NceForm::printed;
  std::size_t negatives = 16;

  // Fusion coefficients.
  AlphaMode alpha_mode = AlphaMode::learned;
  double epsilon = 0.1;
  double momentum = 0.9;
  std::size_t informative_budget = 32;

  // Optimization.
  double learning_rate = 1e-3;
  double finetune_scale = 0.1;
  double max_grad_norm = 5.0;
  std::size_t stage1_epochs = 10;
  std::size_t stage2_epochs = 10;
  std::size_t batch_size = 8;
  std::uint64_t seed = 42;
  std::array<double, 3> split{0.8, 0.1, 0.1};

  // Reporting.
  std::vector<std::size_t> subset_classes;
  std::vector<std::string> class_names;

  // Explanations.
  std::size_t explain_samples = 1000;
  double explain_mask_prob = 0.5;
  double explain_kernel = 0.0;
  double explain_lambda = 1e-3;
  std::size_t explain_group_width = 0;

  std::size_t total_epochs() const { return stage1_epochs + stage2_epochs; }

  // Fills zero stream widths from `dims`; nonzero widths must agree.
  void resolve_dims(const data::StreamDims& dims);
  void validate() const;

  // Sets one field from its text form; throws UsageError.
  void set(std::string_view key, std::string_view value);
  // Every field in a fixed order, values in their canonical text form.
  std::vector<std::pair<std::string, std::string>> to_pairs() const;
  // FNV-1a over the architecture fields only, as 16 hex digits.
  std::string arch_hash() const;
};

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

std::vector<KeyValue> parse_key_values(const std::string& text);

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

data::SynthSpec parse_synth_spec(const std::string& text);
data::SynthSpec load_synth_spec(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace cmerc
