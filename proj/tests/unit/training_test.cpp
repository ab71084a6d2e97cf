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


#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <string>

#include "cmerc/errors.hpp"
#include "cmerc/training.hpp"

namespace {

using namespace cmerc;

data::SynthSpec tiny_spec() {
  data::SynthSpec spec;
  spec.num_classes = 3;
  spec.dims = {5, 4, 4, 3};
  spec.num_dialogues = 16;
  spec.max_utterances = 4;
  spec.separation = 4.0;
  spec.seed = 3;
  return spec;
}

RunConfig tiny_config() {
  RunConfig c;
  c.num_classes = 3;
  c.lstm_hidden = 4;
  c.encoder_dim = 4;
  c.attention_layers = 1;
  c.man_layers = 1;
  c.man_width = 4;
  c.heads = 1;
  c.context_hidden = 4;
  c.context_dim = 4;
  c.negatives = 4;
  c.informative_budget = 8;
  c.learning_rate = 3e-3;
  c.stage1_epochs = 2;
  c.stage2_epochs = 2;
  c.batch_size = 4;
  c.seed = 5;
  c.split = {0.75, 0.125, 0.125};
  return c;
}

struct Fixture {
  RunConfig config = tiny_config();
  data::Dataset dataset = data::synth_generate(tiny_spec());
  data::Split split = prepare_data(dataset, config);
};

TEST(Training, ZeroEpochsCheckpointIsInitialState) {
  Fixture f;
  TrainState state = init_train_state(f.config);
  train_epochs(state, f.split, 0);
  EXPECT_EQ(state.epochs_completed, 0u);
  const std::string text = checkpoint_json(state);
  EXPECT_EQ(text, checkpoint_json(init_train_state(f.config)));
  EXPECT_EQ(checkpoint_json(parse_checkpoint(text)), text);
}

TEST(Training, FullBatchStageOneLossDecreases) {
  Fixture f;
  f.config.batch_size = 64;
  f.config.learning_rate = 1e-3;
  f.config.stage1_epochs = 5;
  TrainState state = init_train_state(f.config);
  std::vector<EpochLog> logs;
  train_epochs(state, f.split, 5, [&](const EpochLog& log) {
    EXPECT_EQ(log.stage, 1);
    logs.push_back(log);
  });
  ASSERT_EQ(logs.size(), 5u);
  // Negatives are redrawn every epoch, so the contrastive term is a noisy
  // estimate; only the focal term is monotone step to step.
  for (std::size_t e = 1; e < logs.size(); ++e) EXPECT_LE(logs[e].focal, logs[e - 1].focal) << "epoch " << e;
  EXPECT_LT(logs.back().loss, logs.front().loss);
}

TEST(Training, ResumeMatchesUninterrupted) {
  Fixture f;
  TrainState straight = init_train_state(f.config);
  train_epochs(straight, f.split, 4);

  for (std::size_t cut : {1u, 2u, 3u}) {
    TrainState first = init_train_state(f.config);
    train_epochs(first, f.split, cut);
    TrainState resumed = parse_checkpoint(checkpoint_json(first));
    train_epochs(resumed, f.split, 4);
    EXPECT_EQ(checkpoint_json(resumed), checkpoint_json(straight)) << "cut at " << cut;
  }
}

TEST(Training, EpochLogsCarryStageAndAlphas) {
  Fixture f;
  TrainState state = init_train_state(f.config);
  std::vector<EpochLog> logs;
  train_epochs(state, f.split, 10, [&](const EpochLog& log) { logs.push_back(log); });
  ASSERT_EQ(logs.size(), 4u);
  EXPECT_EQ(logs[1].stage, 1);
  EXPECT_EQ(logs[2].stage, 2);
  EXPECT_NE(logs[0].ace, 0.0);
  EXPECT_EQ(logs[3].ace, 0.0);
  EXPECT_TRUE(logs[3].val_accuracy.has_value());
  EXPECT_EQ(logs[3].alpha_prime_1, state.alphas.alpha_prime_1);
}

TEST(Training, FixedAndRandomAlphasStayPut) {
  Fixture f;
  for (AlphaMode mode : {AlphaMode::fixed, AlphaMode::random}) {
    f.config.alpha_mode = mode;
    TrainState state = init_train_state(f.config);
    const auto before = state.alphas.composed;
    train_epochs(state, f.split, 4);
    EXPECT_EQ(state.alphas.composed, before);
  }
  f.config.alpha_mode = AlphaMode::random;
  const auto a = initial_alphas(f.config);
  EXPECT_EQ(a.composed, initial_alphas(f.config).composed);
  f.config.alpha_mode = AlphaMode::fixed;
  EXPECT_NEAR(initial_alphas(f.config).alpha_prime_1, 0.5, 1e-15);
}

TEST(Training, EvaluationIsDeterministic) {
  Fixture f;
  TrainState state = init_train_state(f.config);
  train_epochs(state, f.split, 3);
  const auto a = evaluate(state.model, state.alphas, f.split.test, f.config);
  const auto b = evaluate(state.model, state.alphas, f.split.test, f.config);
  const auto t = evaluate(state.model, state.alphas, f.split.test, f.config,
                          context::ContextPath::target_speaker);
  EXPECT_EQ(metrics_json(a, t, "test"), metrics_json(b, t, "test"));
  EXPECT_EQ(predictions_jsonl(a, f.config), predictions_jsonl(b, f.config));
}

TEST(Training, OverfitsTinyTrainingSet) {
  data::SynthSpec spec = tiny_spec();
  spec.num_dialogues = 6;
  spec.separation = 6.0;
  RunConfig config = tiny_config();
  config.split = {1.0, 0.0, 0.0};
  config.stage1_epochs = 40;
  config.stage2_epochs = 20;
  config.learning_rate = 1e-2;
  const auto dataset = data::synth_generate(spec);
  const auto split = prepare_data(dataset, config);
  TrainState state = init_train_state(config);
  train_epochs(state, split, config.total_epochs());
  EXPECT_GE(evaluate(state.model, state.alphas, split.train, config).report.accuracy, 0.95);
}

TEST(Training, NonFiniteLossNamesTheBatch) {
  Fixture f;
  f.dataset[0].utterances[0].features[0].mutable_values()[0] = std::numeric_limits<double>::max();
  f.dataset[0].utterances[0].features[0].mutable_values()[1] = -std::numeric_limits<double>::max();
  TrainState state = init_train_state(f.config);
  data::Split split;
  split.train = {f.dataset[0]};
  try {
    train_epochs(state, split, 1);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("epoch 0, batch 0"), std::string::npos) << msg;
    EXPECT_NE(msg.find(f.dataset[0].dialogue_id), std::string::npos) << msg;
  }
}

TEST(Checkpoint, RejectsTamperedArchitecture) {
  Fixture f;
  std::string text = checkpoint_json(init_train_state(f.config));
  const auto at = text.find("\"man_layers\":\"1\"");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 16, "\"man_layers\":\"2\"");
  EXPECT_THROW(parse_checkpoint(text), DataError);
  EXPECT_THROW(parse_checkpoint("{\"format\":\"other\"}"), DataError);
  EXPECT_THROW(parse_checkpoint("not json"), DataError);
}

TEST(Checkpoint, EmptyTrainingSplit) {
  Fixture f;
  TrainState state = init_train_state(f.config);
  EXPECT_THROW(run_epoch(state, data::Split{}), DataError);
}

}  // namespace
