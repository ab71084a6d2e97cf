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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cmerc/config.hpp"
#include "cmerc/data.hpp"
#include "cmerc/fusion.hpp"
#include "cmerc/metrics.hpp"
#include "cmerc/model.hpp"
#include "cmerc/numerics.hpp"

namespace cmerc {

// Everything needed to continue a run bit-exactly. Epochs are numbered
// globally: [0, stage1_epochs) is stage 1, the rest stage 2.
struct TrainState {
  RunConfig config;
  Model model;
  Adam adam;
  fusion::AlphaState alphas;
  std::size_t epochs_completed = 0;
};

// `config` must have resolved stream widths.
TrainState init_train_state(const RunConfig& config);
fusion::AlphaState initial_alphas(const RunConfig& config);

struct EpochLog {
  std::size_t epoch = 0;
  int stage = 1;
  double loss = 0.0;
  double ace = 0.0;
  double focal = 0.0;
  std::size_t batches = 0;
  std::optional<double> val_accuracy;
  std::optional<double> val_weighted_f1;
  double alpha_prime_1 = 0.0;
  double alpha_prime_2 = 0.0;
  std::size_t informative = 0;
};

std::string epoch_log_json(const EpochLog& log);

// Runs one epoch. Throws NumericError naming the batch on a non-finite loss.
EpochLog run_epoch(TrainState& state, const data::Split& split);

// Runs epochs until `until_epoch` (capped at the configured total).
void train_epochs(TrainState& state, const data::Split& split, std::size_t until_epoch,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

struct Evaluation {
  std::vector<std::string> utterance_ids;
  std::vector<std::size_t> golds;
  std::vector<std::size_t> preds;
  std::vector<std::vector<double>> probs;
  metrics::MetricsReport report;
};

Evaluation evaluate(const Model& model, const fusion::AlphaState& alphas,
                    const data::Dataset& dataset, const RunConfig& config,
                    context::ContextPath path = context::ContextPath::all_speakers);

// Both context paths, as one JSON document.
std::string metrics_json(const Evaluation& all_speakers, const Evaluation& target_speaker,
                         const std::string& split_name);
std::string predictions_jsonl(const Evaluation& eval, const RunConfig& config);

std::string checkpoint_json(const TrainState& state);
TrainState parse_checkpoint(const std::string& text);
void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
TrainState load_checkpoint(const std::filesystem::path& path);

// Loads the dataset, splits it and resolves stream widths into `config`.
data::Split prepare_data(const data::Dataset& dataset, RunConfig& config);

}  // namespace cmerc
