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

#include <string>

#include "cmerc/ablation.hpp"
#include "cmerc/config.hpp"
#include "cmerc/errors.hpp"

namespace {

using namespace cmerc;

TEST(RunConfigText, ParsesKeysCommentsAndLists) {
  const auto c = parse_run_config(
      "# tiny run\n"
      "num_classes = 3\n"
      "\n"
      "gamma = 0.5   # focusing\n"
      "subset_classes = 0, 2\n"
      "class_names = calm,sad,angry\n"
      "alpha_mode = random\n"
      "audio_dim = 5\n");
  EXPECT_EQ(c.num_classes, 3u);
  EXPECT_EQ(c.gamma, 0.5);
  EXPECT_EQ(c.subset_classes, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(c.class_names[2], "angry");
  EXPECT_EQ(c.alpha_mode, AlphaMode::random);
  EXPECT_EQ(c.stream_dims[3], 5u);
}

TEST(RunConfigText, UnknownKeyRejectedWithLine) {
  try {
    parse_run_config("gamma = 1\nlearning_rat = 0.1\n");
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("learning_rat"), std::string::npos) << msg;
  }
}

TEST(RunConfigText, MalformedValuesRejected) {
  EXPECT_THROW(parse_run_config("gamma = fast\n"), UsageError);
  EXPECT_THROW(parse_run_config("batch_size = -2\n"), UsageError);
  EXPECT_THROW(parse_run_config("gamma\n"), UsageError);
  EXPECT_THROW(parse_run_config("gamma = 1\ngamma = 2\n"), UsageError);
  EXPECT_THROW(parse_run_config("alpha_mode = sometimes\n"), UsageError);
  EXPECT_THROW(parse_run_config("train_fraction = 0.9\n"), UsageError);
  EXPECT_THROW(parse_run_config("num_classes = 3\nsubset_classes = 3\n"), UsageError);
}

TEST(RunConfigText, PairsRoundTrip) {
  RunConfig c;
  c.gamma = 0.75;
  c.learning_rate = 3e-3;
  c.class_names = {"a", "b", "c", "d"};
  c.subset_classes = {1, 3};
  std::string text;
  for (const auto& [k, v] : c.to_pairs()) text += k + " = " + v + "\n";
  const auto back = parse_run_config(text);
  EXPECT_EQ(back.to_pairs(), c.to_pairs());
}

TEST(RunConfigHash, OnlyArchitectureMatters) {
  RunConfig a, b;
  b.learning_rate = 0.5;
  b.gamma = 0.0;
  b.seed = 9;
  EXPECT_EQ(a.arch_hash(), b.arch_hash());
  EXPECT_EQ(a.arch_hash().size(), 16u);
  b.man_layers = 3;
  EXPECT_NE(a.arch_hash(), b.arch_hash());
}

TEST(RunConfigDims, ResolveFillsZerosAndChecksTheRest) {
  RunConfig c;
  c.stream_dims = {0, 6, 0, 0};
  c.resolve_dims({8, 6, 6, 5});
  EXPECT_EQ(c.stream_dims, (data::StreamDims{8, 6, 6, 5}));
  EXPECT_THROW(c.resolve_dims({9, 6, 6, 5}), DataError);
}

TEST(SynthSpecText, KeysAndValidation) {
  const auto s = parse_synth_spec("dialogues = 12\nvideo_separation = 0.5\nclass_weights = 0.25,0.25,0.25,0.25\n");
  EXPECT_EQ(s.num_dialogues, 12u);
  EXPECT_EQ(s.mode_separation[1], 0.5);
  EXPECT_THROW(parse_synth_spec("colour = red\n"), UsageError);
  EXPECT_THROW(parse_synth_spec("separation = 0\n"), UsageError);
}

TEST(Ablation, SettingCounts) {
  const RunConfig base;
  EXPECT_EQ(ablation_settings(base, Sweep::alpha).size(), 3u);
  EXPECT_EQ(ablation_settings(base, Sweep::gamma).size(), 4u);
  EXPECT_EQ(ablation_settings(base, Sweep::layers).size(), 4u);
  const auto alpha = ablation_settings(base, Sweep::alpha);
  EXPECT_EQ(alpha[0].config.alpha_mode, AlphaMode::random);
  EXPECT_EQ(alpha[1].config.alpha_mode, AlphaMode::fixed);
  EXPECT_EQ(alpha[2].config.alpha_mode, AlphaMode::learned);
  const auto layers = ablation_settings(base, Sweep::layers);
  EXPECT_EQ(layers[1].config.man_layers, 3u);
  const auto gamma = ablation_settings(base, Sweep::gamma);
  EXPECT_EQ(gamma[3].config.gamma, 1.25);
  EXPECT_THROW(parse_sweep("dropout"), UsageError);
  EXPECT_EQ(to_string(parse_sweep("layers")), "layers");
}

}  // namespace
