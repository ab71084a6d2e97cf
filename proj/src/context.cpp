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


#include "cmerc/context.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cmerc/errors.hpp"
#include "cmerc/ops.hpp"

namespace cmerc::context {

void ContextConfig::validate() const {
  if (input_dim == 0 || lstm_hidden == 0 || state_dim == 0 || num_classes < 2) {
    throw ContractError("context dimensions must be positive and num_classes >= 2");
  }
}

ContextParams ContextParams::init(const ContextConfig& config, Rng& rng) {
  config.validate();
  ContextParams p;
  p.dialogue = encoders::BiLstmParams::init(config.input_dim, config.lstm_hidden, config.state_dim, rng);
  p.speaker = encoders::BiLstmParams::init(config.input_dim, config.lstm_hidden, config.state_dim, rng);
  p.head = {init_xavier({2 * config.state_dim, config.num_classes}, rng),
            Tensor::zeros({1, config.num_classes}, true)};
  return p;
}

ContextParams ContextParams::zeros(const ContextConfig& config) {
  config.validate();
  ContextParams p;
  p.dialogue = encoders::BiLstmParams::zeros(config.input_dim, config.lstm_hidden, config.state_dim);
  p.speaker = encoders::BiLstmParams::zeros(config.input_dim, config.lstm_hidden, config.state_dim);
  p.head = {Tensor::zeros({2 * config.state_dim, config.num_classes}, true),
            Tensor::zeros({1, config.num_classes}, true)};
  return p;
}

void ContextParams::collect(ParamList& out) const {
  dialogue.collect(out, "ctx.dialogue");
  speaker.collect(out, "ctx.speaker");
  out.push_back({"ctx.head.weight", head.weight});
  out.push_back({"ctx.head.bias", head.bias});
}

DialogueContexts speaker_subsequence(std::span<const Tensor> fused,
                                     std::span<const std::string> speakers,
                                     const std::string& speaker_id) {
  if (fused.size() != speakers.size()) {
    throw ContractError("speaker_subsequence: descriptor and speaker counts differ");
  }
  DialogueContexts out;
  out.dialogue_seq.assign(fused.begin(), fused.end());
  out.speaker_id = speaker_id;
  for (std::size_t j = 0; j < speakers.size(); ++j) {
    if (speakers[j] == speaker_id) {
      out.speaker_seq.push_back(fused[j]);
      out.index_map.push_back(j);
    }
  }
  if (out.index_map.empty()) {
    std::set<std::string> known(speakers.begin(), speakers.end());
    std::string list;
    for (const auto& s : known) list += (list.empty() ? "" : ", ") + s;
    throw LookupError("unknown speaker '" + speaker_id + "'; known speakers: " + list);
  }
  return out;
}

namespace {

Tensor run_context(const encoders::BiLstmParams& lstm, std::span<const Tensor> seq) {
  return encoders::bilstm_forward(lstm, seq.size() == 1 ? seq.front() : concat_rows(seq));
}

}  // namespace

std::vector<Tensor> dual_context_forward(const DialogueContexts& contexts,
                                         const ContextParams& params) {
  if (contexts.dialogue_seq.empty() || contexts.speaker_seq.empty()) {
    throw ContractError("dual_context_forward: both sequences must be nonempty");
  }
  if (contexts.index_map.size() != contexts.speaker_seq.size()) {
    throw ContractError("dual_context_forward: index map does not match the speaker sequence");
  }
  const Tensor d = run_context(params.dialogue, contexts.dialogue_seq);
  const Tensor s = run_context(params.speaker, contexts.speaker_seq);
  std::vector<Tensor> out;
  out.reserve(contexts.speaker_seq.size());
  for (std::size_t l = 0; l < contexts.speaker_seq.size(); ++l) {
    const Tensor parts[] = {slice_rows(s, l, 1), slice_rows(d, contexts.index_map[l], 1)};
    out.push_back(concat_cols(parts));
  }
  return out;
}

Tensor head_probs(const Tensor& e, const man::DenseLayer& head) {
  return softmax_rows(add_row(matmul(e, head.weight), head.bias));
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ContractError("argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

EmotionPrediction predict_emotion(const Tensor& e, const man::DenseLayer& head,
                                  std::string utterance_id) {
  for (double v : e.values()) {
    if (!std::isfinite(v)) throw NumericError("predict_emotion: non-finite utterance state");
  }
  EmotionPrediction p;
  p.utterance_id = std::move(utterance_id);
  p.probs = head_probs(e, head).to_vector();
  p.label = argmax(p.probs);
  return p;
}

std::vector<Tensor> classify_dialogue(std::span<const Tensor> fused,
                                      std::span<const std::string> speakers,
                                      const ContextParams& params, ContextPath path,
                                      const std::string& target) {
  if (fused.empty()) throw ContractError("classify_dialogue: empty dialogue");
  if (fused.size() != speakers.size()) {
    throw ContractError("classify_dialogue: descriptor and speaker counts differ");
  }
  const std::size_t n = fused.size();
  const Tensor d = run_context(params.dialogue, fused);
  std::vector<Tensor> speaker_states(n);

  std::vector<std::string> order;
  if (path == ContextPath::all_speakers) {
    for (const auto& s : speakers) {
      if (std::find(order.begin(), order.end(), s) == order.end()) order.push_back(s);
    }
  } else {
    order.push_back(target);
  }
  for (const auto& speaker : order) {
    const DialogueContexts ctx = speaker_subsequence(fused, speakers, speaker);
    const Tensor s = run_context(params.speaker, ctx.speaker_seq);
    for (std::size_t l = 0; l < ctx.index_map.size(); ++l) {
      speaker_states[ctx.index_map[l]] = slice_rows(s, l, 1);
    }
  }

  const Tensor placeholder = Tensor::zeros({1, params.speaker.output_dim()});
  std::vector<Tensor> probs;
  probs.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Tensor parts[] = {speaker_states[j].defined() ? speaker_states[j] : placeholder,
                            slice_rows(d, j, 1)};
    probs.push_back(head_probs(concat_cols(parts), params.head));
  }
  return probs;
}

}  // namespace cmerc::context
