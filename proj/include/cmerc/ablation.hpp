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
#include <string>
#include <string_view>
#include <vector>

#include "cmerc/config.hpp"
#include "cmerc/data.hpp"

namespace cmerc {

enum class Sweep { alpha, gamma, layers };

Sweep parse_sweep(std::string_view text);
std::string_view to_string(Sweep sweep);

struct AblationSetting {
  std::string label;
  RunConfig config;
};

// alpha: test-1 random, test-2 fixed-equal, test-3 learned.
// gamma: 0.5, 0.75, 1.0, 1.25.  layers: 1, 3, 4, 5.
std::vector<AblationSetting> ablation_settings(const RunConfig& base, Sweep sweep);

struct AblationRow {
  std::string sweep;
  std::string setting;
  std::vector<std::uint64_t> seeds;
  std::vector<double> weighted_f1;
  std::vector<double> accuracy;
  double mean_weighted_f1 = 0.0;
  double mean_accuracy = 0.0;
};

std::string ablation_row_json(const AblationRow& row);

// Trains every setting once per seed (seed, seed+1, ...) on the same split
// and scores the test split. `config` must have resolved stream widths.
std::vector<AblationRow> run_ablation(const RunConfig& config, const data::Split& split, Sweep sweep,
                                      std::size_t num_seeds = 1);

}  // namespace cmerc
