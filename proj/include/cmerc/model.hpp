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
#include <vector>

#include "cmerc/config.hpp"
#include "cmerc/context.hpp"
#include "cmerc/data.hpp"
#include "cmerc/encoders.hpp"
#include "cmerc/fusion.hpp"
#include "cmerc/man.hpp"

// The full pipeline: encoders -> cross-modal network -> adaptive fusion ->
// dialogue/speaker context -> emotion head.
namespace cmerc {

struct Model {
  encoders::EncoderParams encoder;
  man::ManParams man;
  context::ContextParams context;

  // `config` must have resolved stream widths.
  static Model init(const RunConfig& config, Rng& rng);

  // Encoders and the cross-modal network.
  ParamList stage1_params() const;
  ParamList context_params() const;
  ParamList all_params() const;
};

encoders::EncoderConfig encoder_config(const RunConfig& config);
man::ManConfig man_config(const RunConfig& config);
context::ContextConfig context_config(const RunConfig& config);

// Per-mode cross-attended descriptors of one utterance, in Mode order.
std::vector<man::CrossAttendedDescriptor> forward_utterance(const Model& model,
                                                            const data::Utterance& utterance);

// Fused descriptor A(u) for every utterance of the dialogue. When
// `descriptors` is given it receives the per-utterance cross-attended output.
std::vector<Tensor> fuse_dialogue(
    const Model& model, const data::Dialogue& dialogue, const fusion::AlphaState& alphas,
    std::vector<std::vector<man::CrossAttendedDescriptor>>* descriptors = nullptr);

std::vector<std::string> speakers_of(const data::Dialogue& dialogue);

// Head probabilities per utterance. The target-speaker path uses the first
// speaker of the dialogue as target.
std::vector<Tensor> dialogue_probs(const Model& model, const data::Dialogue& dialogue,
                                   const fusion::AlphaState& alphas,
                                   context::ContextPath path = context::ContextPath::all_speakers);

}  // namespace cmerc
