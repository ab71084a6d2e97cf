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
#include <vector>

#include "cmerc/modes.hpp"
#include "cmerc/rng.hpp"
#include "cmerc/tensor.hpp"

namespace cmerc::data {

struct Utterance {
  std::string utterance_id;
  std::string speaker_id;
  std::size_t label = 0;
  // rows × width per stream, indexed by Stream. Never trainable.
  std::array<Tensor, kNumStreams> features;

  const Tensor& stream(Stream s) const { return features[index_of(s)]; }
};

struct Dialogue {
  std::string dialogue_id;
  std::vector<Utterance> utterances;
};

using Dataset = std::vector<Dialogue>;

using StreamDims = std::array<std::size_t, kNumStreams>;

// Widths of the first utterance; {0,0,0,0} for an empty dataset.
StreamDims stream_dims(const Dataset& dataset);
std::size_t utterance_count(const Dataset& dataset);

// Throws DataError on a structural problem. `num_classes` of 0 skips the
// label range check.
void validate(const Dataset& dataset, std::size_t num_classes = 0);

// JSON Lines, one dialogue per line; blank lines are skipped. Errors cite the
// 1-based record number.
Dataset load_dataset(const std::filesystem::path& path, std::size_t num_classes = 0);
Dataset parse_dataset(const std::string& text, std::size_t num_classes = 0);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
std::string serialize_dataset(const Dataset& dataset);

struct SynthSpec {
  std::size_t num_classes = 4;
  StreamDims dims{8, 6, 6, 5};
  // Distance of every class centroid from the origin, in units of `noise`
  // (of 1 when noise is 0).
  double separation = 4.0;
  // Per-mode multiplier on `separation`, indexed by Mode.
  std::array<double, kNumModes> mode_separation{1.0, 1.0, 1.0};
  // Correlation of the utterance-level deviation across modes.
  double rho = 0.6;
  double noise = 1.0;
  // Extra i.i.d. noise on each frame around the utterance mean.
  double frame_noise = 0.0;
  std::size_t min_frames = 2;
  std::size_t max_frames = 4;
  std::size_t num_dialogues = 200;
  std::size_t min_utterances = 2;
  std::size_t max_utterances = 8;
  std::size_t num_speakers = 2;
  // Class priors; empty means uniform.
  std::vector<double> class_weights;
  std::uint64_t seed = 42;

  void validate() const;
};

// Class centroids of one stream: centroids[c] has `dim` entries. Orthogonal
// whenever dim >= num_classes.
std::vector<std::vector<double>> synth_centroids(const SynthSpec& spec, Stream stream);

Dataset synth_generate(const SynthSpec& spec);

struct Split {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Dialogue-level split; sizes are round(f·n) for train and val, the rest is
// test. Each part keeps the original dialogue order.
Split split(const Dataset& dataset, std::array<double, 3> fractions, std::uint64_t seed);

// Shuffled dialogue-index batches covering [0, n).
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, Rng& rng);

}  // namespace cmerc::data
