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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmerc/modes.hpp"
#include "cmerc/numerics.hpp"
#include "cmerc/tensor.hpp"

// Unimodal encoders: per-stream Bi-LSTM, then a stack of self-attention
// layers per mode, yielding the attended sequence and its row mean.
namespace cmerc::encoders {

struct EncoderConfig {
  // Input feature widths per stream, indexed by Stream.
  std::array<std::size_t, kNumStreams> input_dims{};
  // LSTM state width per direction.
  std::size_t lstm_hidden = 8;
  // Attended descriptor width per mode, indexed by Mode.
  std::array<std::size_t, kNumModes> output_dims{8, 8, 8};
  // Self-attention depth M.
  std::size_t attention_layers = 2;

  void validate() const;
};

struct BiLstmParams {
  Tensor forward_input;       // din × 4H, gates i f g o
  Tensor forward_recurrent;   // H × 4H
  Tensor forward_bias;        // 1 × 4H
  Tensor backward_input;
  Tensor backward_recurrent;
  Tensor backward_bias;
  Tensor projection;          // 2H × dout
  Tensor projection_bias;     // 1 × dout

  std::size_t input_dim() const { return forward_input.rows(); }
  std::size_t hidden() const { return forward_recurrent.rows(); }
  std::size_t output_dim() const { return projection.cols(); }

  static BiLstmParams init(std::size_t input_dim, std::size_t hidden, std::size_t output_dim,
                           Rng& rng);
  static BiLstmParams zeros(std::size_t input_dim, std::size_t hidden, std::size_t output_dim);
  void collect(ParamList& out, const std::string& prefix) const;
};

// Row t is [forward state_t, backward state_t] projected to output_dim.
// Initial states are zero.
Tensor bilstm_forward(const BiLstmParams& params, const Tensor& seq);

struct AttentionLayer {
  Tensor weight;  // d × d
  Tensor bias;    // 1 × d
};

// w_next = (softmax(w wᵀ / sqrt(d)) w) · weight + bias
Tensor self_attention_layer(const AttentionLayer& layer, const Tensor& w);
Tensor self_attention_stack(std::span<const AttentionLayer> layers, const Tensor& w0);

struct ModeEncoderParams {
  // One Bi-LSTM per input stream of the mode (two for video).
  std::vector<BiLstmParams> streams;
  std::vector<AttentionLayer> attention;

  void collect(ParamList& out, const std::string& prefix) const;
};

struct EncodedMode {
  Tensor full;    // len' × d_m
  Tensor pooled;  // 1 × d_m, mean over rows of `full`
};

// Streams are row-concatenated after their Bi-LSTMs, so the attention stack
// spans all of them; video streams must have equal lengths.
EncodedMode encode_mode(const ModeEncoderParams& params, std::span<const Tensor> streams,
                        std::string_view utterance_id = {});

struct EncoderParams {
  std::array<ModeEncoderParams, kNumModes> modes;

  static EncoderParams init(const EncoderConfig& config, Rng& rng);
  void collect(ParamList& out) const;
};

// Streams feeding each mode, in the order encode_mode expects them.
std::vector<Stream> streams_of(Mode mode);

}  // namespace cmerc::encoders
