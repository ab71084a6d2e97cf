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
#include <span>
#include <string>
#include <vector>

#include "cmerc/encoders.hpp"
#include "cmerc/man.hpp"
#include "cmerc/tensor.hpp"

// Dialogue-level classification: a dialogue-context Bi-LSTM over every fused
// utterance and a speaker-context Bi-LSTM over one speaker's utterances,
// concatenated per utterance and fed to a linear + softmax head.
namespace cmerc::context {

struct ContextConfig {
  std::size_t input_dim = 24;  // fused descriptor width |M|·d
  std::size_t lstm_hidden = 8;
  std::size_t state_dim = 8;   // width of s_l and d_l
  std::size_t num_classes = 4;

  void validate() const;
};

struct ContextParams {
  encoders::BiLstmParams dialogue;
  encoders::BiLstmParams speaker;
  man::DenseLayer head;  // 2·state_dim × C

  std::size_t state_dim() const { return dialogue.output_dim(); }

  static ContextParams init(const ContextConfig& config, Rng& rng);
  static ContextParams zeros(const ContextConfig& config);
  void collect(ParamList& out) const;
};

struct DialogueContexts {
  std::vector<Tensor> dialogue_seq;
  std::vector<Tensor> speaker_seq;
  std::vector<std::size_t> index_map;  // speaker_seq[l] == dialogue_seq[index_map[l]]
  std::string speaker_id;
};

// Throws LookupError listing the known speakers when `speaker_id` is absent.
DialogueContexts speaker_subsequence(std::span<const Tensor> fused,
                                     std::span<const std::string> speakers,
                                     const std::string& speaker_id);

// e_l = s_l ⊕ d_{index_map(l)} for every utterance of the speaker.
std::vector<Tensor> dual_context_forward(const DialogueContexts& contexts,
                                         const ContextParams& params);

struct EmotionPrediction {
  std::string utterance_id;
  std::vector<double> probs;
  std::size_t label = 0;
};

// softmax(e · W + b) as a 1×C row.
Tensor head_probs(const Tensor& e, const man::DenseLayer& head);
EmotionPrediction predict_emotion(const Tensor& e, const man::DenseLayer& head,
                                  std::string utterance_id = {});

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

enum class ContextPath {
  // Every utterance is paired with its own speaker's context.
  all_speakers,
  // Only `target` utterances get a speaker state; the rest use a zero
  // placeholder and rely on the dialogue branch.
  target_speaker,
};

// Head probabilities (1×C) for every utterance of the dialogue, in order.
std::vector<Tensor> classify_dialogue(std::span<const Tensor> fused,
                                      std::span<const std::string> speakers,
                                      const ContextParams& params,
                                      ContextPath path = ContextPath::all_speakers,
                                      const std::string& target = {});

}  // namespace cmerc::context
