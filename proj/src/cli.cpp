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


#include "cmerc/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "cmerc/ablation.hpp"
#include "cmerc/config.hpp"
#include "cmerc/errors.hpp"
#include "cmerc/explain.hpp"
#include "cmerc/ops.hpp"
#include "cmerc/training.hpp"

namespace cmerc::cli {

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
  bool quiet;

  std::ostream& info() {
    static std::ostringstream sink;
    sink.str({});
    return quiet ? sink : err;
  }
};

RunConfig base_config(const Globals& g) {
  RunConfig c = g.config_path.empty() ? RunConfig{} : load_run_config(g.config_path);
  if (g.seed) c.seed = *g.seed;
  c.validate();
  return c;
}

fs::path out_dir(const Globals& g) {
  if (g.out.empty()) throw UsageError("--out <dir> is required");
  fs::path dir(g.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string config_text(const RunConfig& c) {
  std::string out;
  for (const auto& [k, v] : c.to_pairs()) out += k + " = " + v + "\n";
  return out;
}

// Checkpoint config, with the architecture checked against `--config` when
// one is given.
RunConfig checkpoint_config(const Globals& g, const TrainState& state) {
  if (g.config_path.empty()) return state.config;
  RunConfig requested = base_config(g);
  requested.resolve_dims(state.config.stream_dims);
  if (requested.arch_hash() != state.config.arch_hash()) {
    throw DataError("checkpoint architecture (hash " + state.config.arch_hash() +
                    ") is incompatible with the given config (hash " + requested.arch_hash() + ")");
  }
  return requested;
}

const data::Dataset& pick_split(const data::Split& split, const data::Dataset& all,
                                const std::string& name) {
  if (name == "train") return split.train;
  if (name == "val") return split.val;
  if (name == "test") return split.test;
  if (name == "all") return all;
  throw UsageError("unknown split '" + name + "' (train|val|test|all)");
}

int cmd_synth(const Globals& g, const std::string& spec_path, Streams& io) {
  data::SynthSpec spec = spec_path.empty() ? data::SynthSpec{} : load_synth_spec(spec_path);
  if (g.seed) spec.seed = *g.seed;
  if (g.out.empty()) throw UsageError("synth: --out <file> is required");
  const fs::path path(g.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const auto dataset = data::synth_generate(spec);
  data::save_dataset(dataset, path);
  io.info() << "wrote " << dataset.size() << " dialogues (" << data::utterance_count(dataset)
            << " utterances) to " << path.string() << "\n";
  return kOk;
}

int cmd_train(const Globals& g, const std::string& input, const std::string& resume,
              std::optional<std::size_t> until_epoch, const std::string& alpha_mode, Streams& io) {
  const fs::path dir = out_dir(g);
  std::optional<TrainState> state;
  RunConfig config;
  if (!resume.empty()) {
    state = load_checkpoint(resume);
    config = checkpoint_config(g, *state);
    state->config = config;
  } else {
    config = base_config(g);
  }
  if (!alpha_mode.empty()) {
    config.set("alpha_mode", alpha_mode);
    if (state) state->config.alpha_mode = config.alpha_mode;
  }
  const auto dataset = data::load_dataset(input, config.num_classes);
  const data::Split split = prepare_data(dataset, config);
  if (!state) state = init_train_state(config);
  if (state->config.stream_dims != config.stream_dims) {
    throw DataError("checkpoint stream widths do not match the data");
  }
  const std::size_t stop = until_epoch.value_or(config.total_epochs());
  const bool append = !resume.empty();
  std::ofstream log(dir / "train_log.jsonl", append ? std::ios::app : std::ios::trunc);
  if (!log) throw IoError("cannot write '" + (dir / "train_log.jsonl").string() + "'");
  io.info() << "train: " << split.train.size() << "/" << split.val.size() << "/" << split.test.size()
            << " dialogues, epochs " << state->epochs_completed << ".." << std::min(stop, config.total_epochs())
            << "\n";
  train_epochs(*state, split, stop, [&](const EpochLog& e) {
    const std::string line = epoch_log_json(e);
    log << line << "\n";
    log.flush();
    io.info() << line << "\n";
  });
  save_checkpoint(*state, dir / "checkpoint.json");
  write_text(dir / "config.txt", config_text(state->config));
  io.out << (dir / "checkpoint.json").string() << "\n";
  return kOk;
}

int cmd_eval(const Globals& g, const std::string& input, const std::string& checkpoint,
             const std::string& split_name, const std::string& subset, Streams& io) {
  const fs::path dir = out_dir(g);
  TrainState state = load_checkpoint(checkpoint);
  RunConfig config = checkpoint_config(g, state);
  if (!subset.empty()) config.set("subset_classes", subset);
  config.validate();
  const auto dataset = data::load_dataset(input, config.num_classes);
  const data::Split split = prepare_data(dataset, config);
  const auto& part = pick_split(split, dataset, split_name);
  const auto all = evaluate(state.model, state.alphas, part, config, context::ContextPath::all_speakers);
  const auto target =
      evaluate(state.model, state.alphas, part, config, context::ContextPath::target_speaker);
  const std::string metrics = metrics_json(all, target, split_name);
  write_text(dir / "metrics.json", metrics);
  write_text(dir / "predictions.jsonl", predictions_jsonl(all, config));
  io.out << metrics;
  return kOk;
}

int cmd_explain(const Globals& g, const std::string& input, const std::string& checkpoint,
                const std::string& utterance, std::optional<std::size_t> samples, Streams& io) {
  const fs::path dir = out_dir(g);
  TrainState state = load_checkpoint(checkpoint);
  RunConfig config = checkpoint_config(g, state);
  if (samples) config.explain_samples = *samples;
  const auto dataset = data::load_dataset(input, config.num_classes);
  data::validate(dataset, config.num_classes);
  config.resolve_dims(data::stream_dims(dataset));

  const auto groups = explain::mode_groups(config.man_width, config.explain_group_width);
  explain::PerturbationConfig pc;
  pc.num_samples = config.explain_samples;
  pc.mask_prob = config.explain_mask_prob;
  pc.kernel_width = config.explain_kernel;
  pc.ridge_lambda = config.explain_lambda;
  pc.seed = g.seed.value_or(config.seed);

  std::vector<explain::Explanation> out;
  bool found = false;
  for (const auto& d : dataset) {
    std::vector<std::size_t> targets;
    for (std::size_t j = 0; j < d.utterances.size(); ++j) {
      if (utterance == "all" || d.utterances[j].utterance_id == utterance) targets.push_back(j);
    }
    if (targets.empty()) continue;
    found = true;
    const auto fused = fuse_dialogue(state.model, d, state.alphas);
    const auto speakers = speakers_of(d);
    for (std::size_t j : targets) {
      auto scorer = [&](std::span<const double> instance) {
        std::vector<Tensor> seq = fused;
        seq[j] = Tensor::row({instance.begin(), instance.end()});
        return context::classify_dialogue(seq, speakers, state.model.context)[j].to_vector();
      };
      const auto instance = fused[j].to_vector();
      const auto set = explain::perturb_and_score(instance, groups, scorer, pc);
      auto e = explain::fit_surrogate(set, groups, pc.ridge_lambda);
      e.utterance_id = d.utterances[j].utterance_id;
      out.push_back(std::move(e));
      io.info() << "explained " << out.back().utterance_id << " (R² " << out.back().r2 << ")\n";
    }
  }
  if (!found) throw LookupError("utterance '" + utterance + "' not found in " + input);
  explain::render_report(out, dir);
  io.out << (dir / "index.json").string() << "\n";
  return kOk;
}

int cmd_ablate(const Globals& g, const std::string& input, const std::string& which,
               std::size_t seeds, Streams& io) {
  const Sweep sweep = parse_sweep(which);
  const fs::path dir = out_dir(g);
  RunConfig config = base_config(g);
  const auto dataset = data::load_dataset(input, config.num_classes);
  const data::Split split = prepare_data(dataset, config);
  const auto rows = run_ablation(config, split, sweep, seeds);
  std::string lines;
  for (const auto& r : rows) lines += ablation_row_json(r) + "\n";
  write_text(dir / ("ablate_" + which + ".jsonl"), lines);
  io.out << "setting           w-avg F1   accuracy\n";
  for (const auto& r : rows) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-16s  %8.4f  %9.4f\n", r.setting.c_str(), r.mean_weighted_f1,
                  r.mean_accuracy);
    io.out << buf;
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multimodal emotion recognition in conversation: training, evaluation and explanation"};
  app.name("cmerc");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "Run configuration (key = value)");
  app.add_option("--seed", g.seed, "Seed overriding the config");
  app.add_option("--out", g.out, "Output directory (output file for synth)");
  app.add_flag("--quiet", g.quiet, "Suppress progress output");

  std::string spec_path;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--spec", spec_path, "Synthetic dataset spec (key = value)");

  std::string input, resume, checkpoint, split_name = "test", subset, utterance = "all", which, alpha_mode;
  std::optional<std::size_t> until_epoch, samples;
  std::size_t seeds = 1;

  auto* train = app.add_subcommand("train", "Train both stages and write a checkpoint");
  train->add_option("--input", input, "Dataset (JSON Lines)")->required();
  train->add_option("--resume", resume, "Checkpoint to continue from");
  train->add_option("--until-epoch", until_epoch, "Stop after this many epochs in total");
  train->add_option("--alpha-mode", alpha_mode, "learned|fixed|random (overrides the config)");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--input", input, "Dataset (JSON Lines)")->required();
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--split", split_name, "train|val|test|all");
  eval->add_option("--subset", subset, "Comma-separated classes for the subset w-avg F1");

  auto* expl = app.add_subcommand("explain", "Local surrogate explanations");
  expl->add_option("--input", input, "Dataset (JSON Lines)")->required();
  expl->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  expl->add_option("--utterance", utterance, "Utterance id or 'all'");
  expl->add_option("--samples", samples, "Perturbation samples per utterance");

  auto* ablate = app.add_subcommand("ablate", "Run an ablation sweep");
  ablate->add_option("--input", input, "Dataset (JSON Lines)")->required();
  ablate->add_option("--which", which, "alpha|gamma|layers")->required();
  ablate->add_option("--seeds", seeds, "Seeds averaged per setting");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  Streams io{out, err, g.quiet};
  try {
    if (*synth) return cmd_synth(g, spec_path, io);
    if (*train) return cmd_train(g, input, resume, until_epoch, alpha_mode, io);
    if (*eval) return cmd_eval(g, input, checkpoint, split_name, subset, io);
    if (*expl) return cmd_explain(g, input, checkpoint, utterance, samples, io);
    if (*ablate) return cmd_ablate(g, input, which, seeds, io);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace cmerc::cli
