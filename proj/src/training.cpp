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


#include "cmerc/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "cmerc/errors.hpp"
#include "cmerc/losses.hpp"
#include "cmerc/ops.hpp"
#include "json.hpp"

namespace cmerc {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kEpochStream = 1000;
constexpr std::uint64_t kProbeStream = 5000;
constexpr std::uint64_t kInitStream = 7;
constexpr std::uint64_t kRandomAlphaStream = 21;

std::size_t argmax_of(const Tensor& probs) { return context::argmax(probs.values()); }

std::string batch_label(std::size_t epoch, std::size_t batch, const data::Dataset& train,
                        const std::vector<std::size_t>& members) {
  std::string ids;
  for (std::size_t i : members) ids += (ids.empty() ? "" : ",") + train[i].dialogue_id;
  return "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + " (dialogues " +
         ids + ")";
}

struct StepResult {
  double total = 0.0;
  double ace = 0.0;
  double focal = 0.0;
};

StepResult stage1_step(TrainState& state, const data::Dataset& train,
                       const std::vector<std::size_t>& members, std::size_t pool_size, Rng& rng) {
  const RunConfig& cfg = state.config;
  Tape tape;
  Tape::Scope scope(tape);
  std::vector<std::vector<Tensor>> descriptors;
  std::vector<std::vector<Tensor>> probs(kNumModes);
  std::vector<std::size_t> labels;
  for (std::size_t d : members) {
    for (const auto& u : train[d].utterances) {
      auto cad = forward_utterance(state.model, u);
      std::vector<Tensor> per_mode;
      for (std::size_t m = 0; m < cad.size(); ++m) {
        per_mode.push_back(cad[m].descriptor);
        probs[m].push_back(cad[m].probs);
      }
      descriptors.push_back(std::move(per_mode));
      labels.push_back(u.label);
    }
  }
  const Tensor focal = losses::averaged_focal(probs, labels, cfg.gamma, cfg.focal_form);
  Tensor ace = Tensor::scalar(0.0);
  if (descriptors.size() >= 2) {
    const auto negatives = losses::sample_negatives(descriptors.size(), cfg.negatives, rng);
    ace = losses::ace_loss(descriptors, negatives, pool_size, cfg.tau, cfg.nce_form);
  }
  const auto report = losses::combined_loss(ace, focal);
  tape.backward(report.total);
  const ParamGroup group{state.model.stage1_params(), 1.0};
  state.adam.step(std::span(&group, 1));
  return {report.total_value, report.ace, report.focal};
}

StepResult stage2_step(TrainState& state, const data::Dataset& train,
                       const std::vector<std::size_t>& members) {
  const RunConfig& cfg = state.config;
  Tape tape;
  Tape::Scope scope(tape);
  std::vector<Tensor> terms;
  for (std::size_t d : members) {
    const auto& dialogue = train[d];
    const auto probs = dialogue_probs(state.model, dialogue, state.alphas);
    for (std::size_t j = 0; j < probs.size(); ++j) {
      terms.push_back(losses::focal_loss(pick(probs[j], 0, dialogue.utterances[j].label), cfg.gamma,
                                         cfg.focal_form));
    }
  }
  const Tensor loss = scale(add_n(terms), 1.0 / static_cast<double>(terms.size()));
  tape.backward(loss);
  const ParamGroup groups[] = {{state.model.context_params(), 1.0},
                               {state.model.stage1_params(), cfg.finetune_scale}};
  state.adam.step(groups);
  return {loss.item(), 0.0, loss.item()};
}

// Validation access for the informative-sample search. Cross-attended
// descriptors are computed once; only fusion and context are rerun.
class ValidationProbe final : public fusion::AlphaProbe {
 public:
  ValidationProbe(const Model& model, const data::Dataset& val, const RunConfig& config)
      : model_(model), val_(val), config_(config) {
    for (std::size_t d = 0; d < val.size(); ++d) {
      std::vector<std::vector<double>> dialogue;
      for (std::size_t j = 0; j < val[d].utterances.size(); ++j) {
        auto cad = forward_utterance(model, val[d].utterances[j]);
        for (const auto& c : cad) dialogue.push_back(c.descriptor.to_vector());
        index_.emplace_back(d, j);
      }
      descriptors_.push_back(std::move(dialogue));
      speakers_.push_back(speakers_of(val[d]));
    }
  }

  std::size_t size() const override { return index_.size(); }

  fusion::AlphaEstimate estimate(std::size_t sample) override {
    const auto [d, j] = index_.at(sample);
    const std::size_t label = val_[d].utterances[j].label;
    std::vector<std::vector<double>> f(kNumModes);
    for (std::size_t m = 0; m < kNumModes; ++m) f[m] = descriptors_[d][j * kNumModes + m];
    auto gradient = [&](std::size_t mode, std::span<const double> at) {
      const auto& cls = model_.man.central.at(mode).classifier;
      Tensor x = Tensor::row({at.begin(), at.end()}, true);
      Tape tape;
      Tape::Scope scope(tape);
      const Tensor p = man::classify(cls, x);
      tape.backward(losses::focal_loss(pick(p, 0, label), config_.gamma, config_.focal_form));
      // The classifier accumulated gradients too; they must not leak into
      // the next optimizer step.
      Tensor weight = cls.weight, bias = cls.bias;
      weight.zero_grad();
      bias.zero_grad();
      const auto g = x.grad();
      return std::vector<double>(g.begin(), g.end());
    };
    return fusion::estimate_sample_alphas(f, gradient, config_.epsilon);
  }

  std::size_t predict(std::size_t sample, const fusion::AlphaState& alphas) override {
    const auto [d, j] = index_.at(sample);
    const auto& dialogue = descriptors_[d];
    std::vector<Tensor> fused;
    for (std::size_t u = 0; u < dialogue.size() / kNumModes; ++u) {
      std::vector<Tensor> blocks;
      for (std::size_t m = 0; m < kNumModes; ++m) blocks.push_back(Tensor::row(dialogue[u * kNumModes + m]));
      fused.push_back(fusion::adaptive_fuse(blocks, alphas));
    }
    const auto probs = context::classify_dialogue(fused, speakers_[d], model_.context);
    return argmax_of(probs.at(j));
  }

 private:
  const Model& model_;
  const data::Dataset& val_;
  const RunConfig& config_;
  std::vector<std::pair<std::size_t, std::size_t>> index_;
  std::vector<std::vector<std::vector<double>>> descriptors_;
  std::vector<std::vector<std::string>> speakers_;
};

std::size_t update_learned_alphas(TrainState& state, const data::Dataset& val, Rng& rng) {
  if (val.empty()) return 0;
  ValidationProbe probe(state.model, val, state.config);
  const auto chosen =
      fusion::select_informative_samples(probe, state.alphas, state.config.informative_budget, rng);
  if (chosen.empty()) return 0;
  std::vector<fusion::AlphaEstimate> estimates;
  estimates.reserve(chosen.size());
  for (std::size_t i : chosen) estimates.push_back(probe.estimate(i));
  state.alphas = fusion::update_alphas(state.alphas, estimates);
  return chosen.size();
}

Json tensor_json(const Tensor& t) {
  return Json{{"shape", {t.rows(), t.cols()}}, {"values", t.values()}};
}

Json alphas_json(const fusion::AlphaState& a) {
  return Json{{"alpha_prime_1", a.alpha_prime_1}, {"alpha_prime_2", a.alpha_prime_2},
              {"composed", a.composed},           {"pairwise", a.pairwise},
              {"epsilon", a.epsilon},             {"momentum", a.momentum}};
}

}  // namespace

fusion::AlphaState initial_alphas(const RunConfig& config) {
  switch (config.alpha_mode) {
    case AlphaMode::fixed:
      return fusion::AlphaState::uniform(0.5, config.epsilon, config.momentum);
    case AlphaMode::random: {
      Rng rng = Rng(config.seed).fork(kRandomAlphaStream);
      const double a1 = rng.uniform();
      const double a2 = rng.uniform();
      return fusion::AlphaState::from_primes(a1, a2, config.epsilon, config.momentum);
    }
    case AlphaMode::learned:
      break;
  }
  return fusion::AlphaState::from_primes(0.5, 0.5, config.epsilon, config.momentum);
}

TrainState init_train_state(const RunConfig& config) {
  config.validate();
  Rng rng = Rng(config.seed).fork(kInitStream);
  AdamOptions opts;
  opts.learning_rate = config.learning_rate;
  opts.max_grad_norm = config.max_grad_norm;
  return TrainState{config, Model::init(config, rng), Adam(opts), initial_alphas(config), 0};
}

std::string epoch_log_json(const EpochLog& log) {
  Json j;
  j["epoch"] = log.epoch;
  j["stage"] = log.stage;
  j["loss"] = log.loss;
  j["ace"] = log.ace;
  j["focal"] = log.focal;
  j["batches"] = log.batches;
  j["val_accuracy"] = log.val_accuracy ? Json(*log.val_accuracy) : Json(nullptr);
  j["val_weighted_f1"] = log.val_weighted_f1 ? Json(*log.val_weighted_f1) : Json(nullptr);
  j["alpha_prime_1"] = log.alpha_prime_1;
  j["alpha_prime_2"] = log.alpha_prime_2;
  j["informative"] = log.informative;
  return j.dump();
}

EpochLog run_epoch(TrainState& state, const data::Split& split) {
  const RunConfig& cfg = state.config;
  const std::size_t epoch = state.epochs_completed;
  if (split.train.empty()) throw DataError("training split is empty");
  EpochLog log;
  log.epoch = epoch;
  log.stage = epoch < cfg.stage1_epochs ? 1 : 2;
  Rng rng = Rng(cfg.seed).fork(kEpochStream + epoch);
  const auto batches = data::make_batches(split.train.size(), cfg.batch_size, rng);
  const std::size_t pool = data::utterance_count(split.train);
  for (std::size_t b = 0; b < batches.size(); ++b) {
    StepResult r;
    try {
      r = log.stage == 1 ? stage1_step(state, split.train, batches[b], pool, rng)
                         : stage2_step(state, split.train, batches[b]);
    } catch (const NumericError& e) {
      throw NumericError("non-finite value at " + batch_label(epoch, b, split.train, batches[b]) +
                         ": " + e.what());
    }
    if (!std::isfinite(r.total)) {
      throw NumericError("non-finite loss at " + batch_label(epoch, b, split.train, batches[b]));
    }
    log.loss += r.total;
    log.ace += r.ace;
    log.focal += r.focal;
  }
  log.batches = batches.size();
  const double nb = static_cast<double>(batches.size());
  log.loss /= nb;
  log.ace /= nb;
  log.focal /= nb;

  if (log.stage == 2 && cfg.alpha_mode == AlphaMode::learned) {
    Rng probe_rng = Rng(cfg.seed).fork(kProbeStream + epoch);
    log.informative = update_learned_alphas(state, split.val, probe_rng);
  }
  if (!split.val.empty()) {
    const auto eval = evaluate(state.model, state.alphas, split.val, cfg);
    log.val_accuracy = eval.report.accuracy;
    log.val_weighted_f1 = eval.report.weighted_f1;
  }
  log.alpha_prime_1 = state.alphas.alpha_prime_1;
  log.alpha_prime_2 = state.alphas.alpha_prime_2;
  state.epochs_completed = epoch + 1;
  return log;
}

void train_epochs(TrainState& state, const data::Split& split, std::size_t until_epoch,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  const std::size_t stop = std::min(until_epoch, state.config.total_epochs());
  while (state.epochs_completed < stop) {
    const EpochLog log = run_epoch(state, split);
    if (on_epoch) on_epoch(log);
  }
}

Evaluation evaluate(const Model& model, const fusion::AlphaState& alphas,
                    const data::Dataset& dataset, const RunConfig& config,
                    context::ContextPath path) {
  Evaluation out;
  for (const auto& d : dataset) {
    const auto probs = dialogue_probs(model, d, alphas, path);
    for (std::size_t j = 0; j < probs.size(); ++j) {
      out.utterance_ids.push_back(d.utterances[j].utterance_id);
      out.golds.push_back(d.utterances[j].label);
      out.preds.push_back(argmax_of(probs[j]));
      out.probs.push_back(probs[j].to_vector());
    }
  }
  if (out.golds.empty()) throw DataError("evaluation set is empty");
  for (std::size_t g : out.golds) {
    if (g >= config.num_classes) {
      throw DataError("label " + std::to_string(g) + " outside the configured " +
                      std::to_string(config.num_classes) + " classes");
    }
  }
  const auto cm = metrics::confusion(out.golds, out.preds, config.num_classes, config.class_names);
  // A subset without support in this split cannot be scored.
  bool subset_ok = !config.subset_classes.empty();
  if (subset_ok) {
    std::uint64_t support = 0;
    for (std::size_t c : config.subset_classes) support += cm.support(c);
    subset_ok = support > 0;
  }
  out.report = metrics::make_report(
      cm, subset_ok ? std::span<const std::size_t>(config.subset_classes) : std::span<const std::size_t>());
  return out;
}

std::string metrics_json(const Evaluation& all_speakers, const Evaluation& target_speaker,
                         const std::string& split_name) {
  Json j;
  j["split"] = split_name;
  j["utterances"] = all_speakers.golds.size();
  j["all_speakers"] = Json::parse(metrics::report_json(all_speakers.report));
  j["target_speaker"] = Json::parse(metrics::report_json(target_speaker.report));
  return j.dump(2) + "\n";
}

std::string predictions_jsonl(const Evaluation& eval, const RunConfig& config) {
  std::string out;
  for (std::size_t i = 0; i < eval.golds.size(); ++i) {
    Json j;
    j["utterance_id"] = eval.utterance_ids[i];
    j["gold"] = eval.golds[i];
    j["predicted"] = eval.preds[i];
    if (!config.class_names.empty()) j["predicted_name"] = config.class_names.at(eval.preds[i]);
    j["probs"] = eval.probs[i];
    out += j.dump() + "\n";
  }
  return out;
}

std::string checkpoint_json(const TrainState& state) {
  Json j;
  j["format"] = "cmerc-checkpoint-1";
  Json cfg = Json::object();
  for (const auto& [k, v] : state.config.to_pairs()) cfg[k] = v;
  j["config"] = std::move(cfg);
  j["arch_hash"] = state.config.arch_hash();
  j["epochs_completed"] = state.epochs_completed;
  j["alphas"] = alphas_json(state.alphas);
  Json params = Json::object();
  for (const auto& p : state.model.all_params()) params[p.name] = tensor_json(p.tensor);
  j["params"] = std::move(params);
  Json adam = Json::object();
  for (const auto& [name, m] : state.adam.state()) {
    adam[name] = Json{{"steps", m.steps}, {"first", m.first}, {"second", m.second}};
  }
  j["adam"] = std::move(adam);
  return j.dump() + "\n";
}

TrainState parse_checkpoint(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    if (j.at("format") != "cmerc-checkpoint-1") throw DataError("unsupported checkpoint format");
    RunConfig cfg;
    for (const auto& [k, v] : j.at("config").items()) cfg.set(k, v.get<std::string>());
    cfg.validate();
    if (cfg.arch_hash() != j.at("arch_hash").get<std::string>()) {
      throw DataError("checkpoint config hash does not match its stored architecture");
    }
    TrainState state = init_train_state(cfg);
    state.epochs_completed = j.at("epochs_completed").get<std::size_t>();

    const Json& params = j.at("params");
    const ParamList list = state.model.all_params();
    if (params.size() != list.size()) throw DataError("checkpoint parameter count differs from the model");
    for (const auto& p : list) {
      const Json& t = params.at(p.name);
      const auto shape = t.at("shape").get<std::vector<std::size_t>>();
      const auto values = t.at("values").get<std::vector<double>>();
      if (shape.size() != 2 || shape[0] != p.tensor.rows() || shape[1] != p.tensor.cols() ||
          values.size() != p.tensor.size()) {
        throw DataError("checkpoint tensor '" + p.name + "' has the wrong shape");
      }
      Tensor target = p.tensor;
      std::copy(values.begin(), values.end(), target.mutable_values().begin());
    }

    auto& adam = state.adam.mutable_state();
    for (const auto& [name, m] : j.at("adam").items()) {
      Adam::Moments moments;
      moments.steps = m.at("steps").get<std::size_t>();
      moments.first = m.at("first").get<std::vector<double>>();
      moments.second = m.at("second").get<std::vector<double>>();
      adam[name] = std::move(moments);
    }

    const Json& a = j.at("alphas");
    fusion::AlphaState alphas;
    alphas.alpha_prime_1 = a.at("alpha_prime_1").get<double>();
    alphas.alpha_prime_2 = a.at("alpha_prime_2").get<double>();
    alphas.composed = a.at("composed").get<std::array<double, 3>>();
    alphas.pairwise = a.at("pairwise").get<fusion::PairwiseAlphas>();
    alphas.epsilon = a.at("epsilon").get<double>();
    alphas.momentum = a.at("momentum").get<double>();
    alphas.validate();
    state.alphas = std::move(alphas);
    return state;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  } catch (const Error& e) {
    if (dynamic_cast<const DataError*>(&e)) throw;
    throw DataError(std::string("invalid checkpoint: ") + e.what());
  }
}

void save_checkpoint(const TrainState& state, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
  out << checkpoint_json(state);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  try {
    return parse_checkpoint(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

data::Split prepare_data(const data::Dataset& dataset, RunConfig& config) {
  if (dataset.empty()) throw DataError("dataset is empty");
  data::validate(dataset, config.num_classes);
  config.resolve_dims(data::stream_dims(dataset));
  return data::split(dataset, config.split, config.seed);
}

}  // namespace cmerc
