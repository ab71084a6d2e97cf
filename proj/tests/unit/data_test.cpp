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
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "cmerc/data.hpp"
#include "cmerc/errors.hpp"
#include "oracle.hpp"

namespace {

using cmerc::Tensor;
using namespace cmerc::data;

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "cmerc_data_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string utterance_json(const std::string& id, int audio_width) {
  std::string audio = "[";
  for (int k = 0; k < audio_width; ++k) audio += (k ? ",0.5" : "0.5");
  audio += "]";
  return R"({"utterance_id":")" + id + R"(","speaker_id":"a","label":1,)"
         R"("text_feat":[[1,2]],"video_face_feat":[[3]],"video_back_feat":[[4]],"audio_feat":[)" +
         audio + "]}";
}

std::string dialogue_json(const std::string& id, int audio_width) {
  return R"({"dialogue_id":")" + id + R"(","utterances":[)" + utterance_json(id + "_u0", audio_width) + "]}";
}

TEST(LoadDataset, EmptyFileIsEmptyDataset) {
  const auto path = temp_path("empty.jsonl");
  std::ofstream(path).close();
  EXPECT_TRUE(load_dataset(path).empty());
  EXPECT_TRUE(parse_dataset("\n\n").empty());
}

TEST(LoadDataset, RoundTripIsIdentity) {
  SynthSpec spec;
  spec.num_dialogues = 3;
  spec.frame_noise = 0.3;
  const Dataset original = synth_generate(spec);
  const auto path = temp_path("roundtrip.jsonl");
  save_dataset(original, path);
  const Dataset loaded = load_dataset(path, spec.num_classes);
  ASSERT_EQ(loaded.size(), original.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    EXPECT_EQ(loaded[i].dialogue_id, original[i].dialogue_id);
    ASSERT_EQ(loaded[i].utterances.size(), original[i].utterances.size());
    for (std::size_t j = 0; j < loaded[i].utterances.size(); ++j) {
      const auto& a = loaded[i].utterances[j];
      const auto& b = original[i].utterances[j];
      EXPECT_EQ(a.utterance_id, b.utterance_id);
      EXPECT_EQ(a.speaker_id, b.speaker_id);
      EXPECT_EQ(a.label, b.label);
      for (std::size_t s = 0; s < 4; ++s) {
        EXPECT_EQ(a.features[s].shape(), b.features[s].shape());
        EXPECT_EQ(a.features[s].to_vector(), b.features[s].to_vector());
      }
    }
  }
  EXPECT_EQ(serialize_dataset(loaded), serialize_dataset(original));
}

TEST(LoadDataset, AudioWidthMismatchCitesRecord) {
  const std::string text = dialogue_json("d1", 2) + "\n" + dialogue_json("d2", 2) + "\n" +
                           dialogue_json("d3", 3) + "\n";
  try {
    parse_dataset(text);
    FAIL() << "expected DataError";
  } catch (const cmerc::DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("record 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("d3_u0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("audio"), std::string::npos) << msg;
  }
}

TEST(LoadDataset, MalformedRecordsRejected) {
  EXPECT_THROW(parse_dataset("{not json"), cmerc::DataError);
  EXPECT_THROW(parse_dataset(R"({"dialogue_id":"d","utterances":[]})"), cmerc::DataError);
  EXPECT_NO_THROW(parse_dataset(dialogue_json("d", 2), 2));
  std::string bad_label = dialogue_json("d", 2);
  bad_label.replace(bad_label.find("\"label\":1"), 9, "\"label\":7");
  EXPECT_THROW(parse_dataset(bad_label, 4), cmerc::DataError);
  std::string uneven = dialogue_json("d", 2);
  uneven.replace(uneven.find("[[4]]"), 5, "[[4],[5]]");
  EXPECT_THROW(parse_dataset(uneven), cmerc::DataError);
  EXPECT_THROW(load_dataset(temp_path("does_not_exist.jsonl")), cmerc::IoError);
}

TEST(Synth, NoiseFreeFullyCorrelatedIsDeterministicPerClass) {
  SynthSpec spec;
  spec.rho = 1.0;
  spec.noise = 0.0;
  spec.num_dialogues = 20;
  const Dataset d = synth_generate(spec);
  for (cmerc::Stream s : cmerc::kStreams) {
    const auto centroids = synth_centroids(spec, s);
    for (const auto& dialogue : d) {
      for (const auto& u : dialogue.utterances) {
        const auto pooled = oracle::mean_rows(oracle::to_mat(u.stream(s)));
        EXPECT_LT(oracle::max_abs_diff(pooled, centroids[u.label]), 1e-12);
        // Every other class's centroid is strictly farther.
        for (std::size_t c = 0; c < spec.num_classes; ++c) {
          if (c != u.label) EXPECT_GT(oracle::max_abs_diff(pooled, centroids[c]), 0.1);
        }
      }
    }
  }
}

TEST(Synth, SameSeedSameData) {
  SynthSpec spec;
  spec.num_dialogues = 10;
  EXPECT_EQ(serialize_dataset(synth_generate(spec)), serialize_dataset(synth_generate(spec)));
  SynthSpec other = spec;
  other.seed = 43;
  EXPECT_NE(serialize_dataset(synth_generate(spec)), serialize_dataset(synth_generate(other)));
}

TEST(Synth, NearestCentroidSeparable) {
  SynthSpec spec;
  spec.num_classes = 3;
  spec.separation = 5.0;
  spec.num_dialogues = 400;
  const Dataset d = synth_generate(spec);
  const auto centroids = synth_centroids(spec, cmerc::Stream::text);
  std::size_t correct = 0, total = 0;
  for (const auto& dialogue : d) {
    for (const auto& u : dialogue.utterances) {
      const auto pooled = oracle::mean_rows(oracle::to_mat(u.stream(cmerc::Stream::text)));
      std::size_t best = 0;
      double best_dist = INFINITY;
      for (std::size_t c = 0; c < 3; ++c) {
        double dist = 0.0;
        for (std::size_t k = 0; k < pooled.size(); ++k) dist += std::pow(pooled[k] - centroids[c][k], 2);
        if (dist < best_dist) {
          best_dist = dist;
          best = c;
        }
      }
      correct += best == u.label;
      ++total;
    }
  }
  EXPECT_GE(static_cast<double>(correct) / static_cast<double>(total), 0.99) << correct << "/" << total;
}

TEST(Synth, CentroidsOrthogonalAtRadius) {
  SynthSpec spec;
  spec.separation = 3.0;
  spec.noise = 2.0;
  const auto c = synth_centroids(spec, cmerc::Stream::text);
  for (std::size_t a = 0; a < c.size(); ++a) {
    double norm = 0.0;
    for (double x : c[a]) norm += x * x;
    EXPECT_NEAR(std::sqrt(norm), 6.0, 1e-12);
    for (std::size_t b = a + 1; b < c.size(); ++b) {
      double dot = 0.0;
      for (std::size_t k = 0; k < c[a].size(); ++k) dot += c[a][k] * c[b][k];
      EXPECT_NEAR(dot, 0.0, 1e-10);
    }
  }
}

TEST(Synth, ClassPriorsChiSquare) {
  SynthSpec spec;
  spec.num_classes = 3;
  spec.class_weights = {0.5, 0.3, 0.2};
  spec.num_dialogues = 2000;
  const Dataset d = synth_generate(spec);
  std::vector<double> counts(3, 0.0);
  double n = 0.0;
  for (const auto& dialogue : d)
    for (const auto& u : dialogue.utterances) {
      counts[u.label] += 1.0;
      n += 1.0;
    }
  ASSERT_GE(n, 9000.0);
  double chi2 = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    const double expected = n * spec.class_weights[c];
    chi2 += std::pow(counts[c] - expected, 2) / expected;
  }
  // 99.9th percentile of chi-square with 2 degrees of freedom.
  EXPECT_LT(chi2, 13.82);
}

TEST(Synth, SpeakersAlternateAndSpecValidated) {
  SynthSpec spec;
  spec.num_dialogues = 2;
  spec.num_speakers = 3;
  spec.min_utterances = 5;
  const Dataset d = synth_generate(spec);
  EXPECT_EQ(d[0].utterances[3].speaker_id, "spk0");
  EXPECT_EQ(d[0].utterances[4].speaker_id, "spk1");
  SynthSpec bad = spec;
  bad.separation = 0.0;
  EXPECT_THROW(bad.validate(), cmerc::ContractError);
  bad = spec;
  bad.class_weights = {0.5, 0.2, 0.2, 0.2};
  EXPECT_THROW(bad.validate(), cmerc::ContractError);
}

Dataset numbered(std::size_t n) {
  SynthSpec spec;
  spec.num_dialogues = n;
  spec.max_utterances = 2;
  return synth_generate(spec);
}

TEST(Split, AllTrain) {
  const auto parts = split(numbered(7), {1.0, 0.0, 0.0}, 3);
  EXPECT_EQ(parts.train.size(), 7u);
  EXPECT_TRUE(parts.val.empty());
  EXPECT_TRUE(parts.test.empty());
}

TEST(Split, EightOneOne) {
  const auto parts = split(numbered(10), {0.8, 0.1, 0.1}, 3);
  EXPECT_EQ(parts.train.size(), 8u);
  EXPECT_EQ(parts.val.size(), 1u);
  EXPECT_EQ(parts.test.size(), 1u);
}

TEST(Split, PartitionForRandomSeeds) {
  const Dataset d = numbered(37);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto parts = split(d, {0.6, 0.25, 0.15}, seed);
    std::set<std::string> seen;
    std::size_t count = 0;
    for (const Dataset* part : {&parts.train, &parts.val, &parts.test}) {
      for (const auto& dialogue : *part) {
        seen.insert(dialogue.dialogue_id);
        ++count;
      }
    }
    EXPECT_EQ(count, 37u);
    EXPECT_EQ(seen.size(), 37u);
  }
  EXPECT_EQ(serialize_dataset(split(d, {0.6, 0.25, 0.15}, 4).train),
            serialize_dataset(split(d, {0.6, 0.25, 0.15}, 4).train));
}

TEST(Split, FractionsMustSumToOne) {
  EXPECT_THROW(split(numbered(3), {0.5, 0.3, 0.1}, 1), cmerc::ContractError);
  EXPECT_THROW(split(numbered(3), {1.2, -0.1, -0.1}, 1), cmerc::ContractError);
}

TEST(Batches, CoverEveryIndexOnce) {
  cmerc::Rng rng(5);
  const auto batches = make_batches(11, 4, rng);
  ASSERT_EQ(batches.size(), 3u);
  EXPECT_EQ(batches.back().size(), 3u);
  std::set<std::size_t> seen;
  for (const auto& b : batches) seen.insert(b.begin(), b.end());
  EXPECT_EQ(seen.size(), 11u);
}

}  // namespace
