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


#include "cmerc/model.hpp"

#include "cmerc/errors.hpp"

namespace cmerc {

encoders::EncoderConfig encoder_config(const RunConfig& config) {
  encoders::EncoderConfig c;
  c.input_dims = config.stream_dims;
  c.lstm_hidden = config.lstm_hidden;
  c.output_dims = {config.encoder_dim, config.encoder_dim, config.encoder_dim};
  c.attention_layers = config.attention_layers;
  return c;
}

man::ManConfig man_config(const RunConfig& config) {
  man::ManConfig c;
  c.mode_dims.assign(kNumModes, config.encoder_dim);
  c.layers = config.man_layers;
  c.width = config.man_width;
  c.heads = config.heads;
  c.num_classes = config.num_classes;
  return c;
}

context::ContextConfig context_config(const RunConfig& config) {
  context::ContextConfig c;
  c.input_dim = kNumModes * config.man_width;
  c.lstm_hidden = config.context_hidden;
  c.state_dim = config.context_dim;
  c.num_classes = config.num_classes;
  return c;
}

Model Model::init(const RunConfig& config, Rng& rng) {
  for (std::size_t d : config.stream_dims) {
    if (d == 0) throw ContractError("Model::init: stream widths must be resolved first");
  }
  Model m;
  Rng enc_rng = rng.fork(11), man_rng = rng.fork(12), ctx_rng = rng.fork(13);
  m.encoder = encoders::EncoderParams::init(encoder_config(config), enc_rng);
  m.man = man::ManParams::init(man_config(config), man_rng);
  m.context = context::ContextParams::init(context_config(config), ctx_rng);
  return m;
}

ParamList Model::stage1_params() const {
  ParamList out;
  encoder.collect(out);
  man.collect(out);
  return out;
}

ParamList Model::context_params() const {
  ParamList out;
  context.collect(out);
  return out;
}

ParamList Model::all_params() const {
  ParamList out = stage1_params();
  context.collect(out);
  return out;
}

std::vector<man::CrossAttendedDescriptor> forward_utterance(const Model& model,
                                                            const data::Utterance& utterance) {
  std::vector<Tensor> encoded;
  encoded.reserve(kNumModes);
  for (Mode m : kModes) {
    std::vector<Tensor> streams;
    for (Stream s : encoders::streams_of(m)) streams.push_back(utterance.stream(s));
    encoded.push_back(
        encoders::encode_mode(model.encoder.modes[index_of(m)], streams, utterance.utterance_id).full);
  }
  return man::man_forward(encoded, model.man);
}

std::vector<Tensor> fuse_dialogue(const Model& model, const data::Dialogue& dialogue,
                                  const fusion::AlphaState& alphas,
                                  std::vector<std::vector<man::CrossAttendedDescriptor>>* descriptors) {
  std::vector<Tensor> fused;
  fused.reserve(dialogue.utterances.size());
  if (descriptors) descriptors->clear();
  for (const auto& u : dialogue.utterances) {
    auto cad = forward_utterance(model, u);
    std::vector<Tensor> blocks;
    for (const auto& d : cad) blocks.push_back(d.descriptor);
    fused.push_back(fusion::adaptive_fuse(blocks, alphas));
    if (descriptors) descriptors->push_back(std::move(cad));
  }
  return fused;
}

std::vector<std::string> speakers_of(const data::Dialogue& dialogue) {
  std::vector<std::string> out;
  out.reserve(dialogue.utterances.size());
  for (const auto& u : dialogue.utterances) out.push_back(u.speaker_id);
  return out;
}

std::vector<Tensor> dialogue_probs(const Model& model, const data::Dialogue& dialogue,
                                   const fusion::AlphaState& alphas, context::ContextPath path) {
  const auto fused = fuse_dialogue(model, dialogue, alphas);
  const auto speakers = speakers_of(dialogue);
  return context::classify_dialogue(fused, speakers, model.context, path, speakers.front());
}

}  // namespace cmerc
