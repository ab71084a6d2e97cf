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


#include "cmerc/ablation.hpp"

#include "cmerc/errors.hpp"
#include "cmerc/training.hpp"
#include "json.hpp"

namespace cmerc {

Sweep parse_sweep(std::string_view text) {
  if (text == "alpha") return Sweep::alpha;
  if (text == "gamma") return Sweep::gamma;
  if (text == "layers") return Sweep::layers;
  throw UsageError("unknown sweep '" + std::string(text) + "' (alpha|gamma|layers)");
}

std::string_view to_string(Sweep sweep) {
  switch (sweep) {
    case Sweep::alpha: return "alpha";
    case Sweep::gamma: return "gamma";
    case Sweep::layers: return "layers";
  }
  return "?";
}

std::vector<AblationSetting> ablation_settings(const RunConfig& base, Sweep sweep) {
  std::vector<AblationSetting> out;
  switch (sweep) {
    case Sweep::alpha: {
      const std::pair<const char*, AlphaMode> modes[] = {{"test-1 random", AlphaMode::random},
                                                         {"test-2 equal", AlphaMode::fixed},
                                                         {"test-3 learned", AlphaMode::learned}};
      for (const auto& [label, mode] : modes) {
        RunConfig c = base;
        c.alpha_mode = mode;
        out.push_back({label, c});
      }
      break;
    }
    case Sweep::gamma:
      for (const char* g : {"0.5", "0.75", "1.0", "1.25"}) {
        RunConfig c = base;
        c.set("gamma", g);
        out.push_back({std::string("gamma=") + g, c});
      }
      break;
    case Sweep::layers:
      for (std::size_t h : {1, 3, 4, 5}) {
        RunConfig c = base;
        c.man_layers = h;
        out.push_back({std::to_string(h) + "-layer", c});
      }
      break;
  }
  return out;
}

std::string ablation_row_json(const AblationRow& row) {
  nlohmann::ordered_json j;
  j["sweep"] = row.sweep;
  j["setting"] = row.setting;
  j["seeds"] = row.seeds;
  j["weighted_f1"] = row.weighted_f1;
  j["accuracy"] = row.accuracy;
  j["mean_weighted_f1"] = row.mean_weighted_f1;
  j["mean_accuracy"] = row.mean_accuracy;
  return j.dump();
}

std::vector<AblationRow> run_ablation(const RunConfig& config, const data::Split& split, Sweep sweep,
                                      std::size_t num_seeds) {
  if (num_seeds == 0) throw UsageError("ablation needs at least one seed");
  if (split.test.empty()) throw DataError("ablation needs a nonempty test split");
  std::vector<AblationRow> rows;
  for (const auto& setting : ablation_settings(config, sweep)) {
    AblationRow row;
    row.sweep = std::string(to_string(sweep));
    row.setting = setting.label;
    for (std::size_t k = 0; k < num_seeds; ++k) {
      RunConfig c = setting.config;
      c.seed = config.seed + k;
      TrainState state = init_train_state(c);
      train_epochs(state, split, c.total_epochs());
      const auto eval = evaluate(state.model, state.alphas, split.test, c);
      row.seeds.push_back(c.seed);
      row.weighted_f1.push_back(eval.report.weighted_f1);
      row.accuracy.push_back(eval.report.accuracy);
      row.mean_weighted_f1 += eval.report.weighted_f1 / static_cast<double>(num_seeds);
      row.mean_accuracy += eval.report.accuracy / static_cast<double>(num_seeds);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace cmerc
