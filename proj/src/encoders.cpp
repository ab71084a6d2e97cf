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


#include "cmerc/encoders.hpp"

#include <cmath>

#include "cmerc/errors.hpp"
#include "cmerc/ops.hpp"

namespace cmerc::encoders {

void EncoderConfig::validate() const {
  for (Stream s : kStreams) {
    if (input_dims[index_of(s)] == 0) {
      throw ContractError("encoder input width for " + std::string(stream_name(s)) + " must be positive");
    }
  }
  for (Mode m : kModes) {
    if (output_dims[index_of(m)] == 0) {
      throw ContractError("encoder output width for " + std::string(mode_name(m)) + " must be positive");
    }
  }
  if (lstm_hidden == 0) throw ContractError("lstm_hidden must be positive");
  if (attention_layers == 0) throw ContractError("attention_layers must be >= 1");
}

BiLstmParams BiLstmParams::init(std::size_t input_dim, std::size_t hidden, std::size_t output_dim,
                                Rng& rng) {
  BiLstmParams p;
  p.forward_input = init_xavier({input_dim, 4 * hidden}, rng);
  p.forward_recurrent = init_xavier({hidden, 4 * hidden}, rng);
  p.forward_bias = Tensor::zeros({1, 4 * hidden}, true);
  p.backward_input = init_xavier({input_dim, 4 * hidden}, rng);
  p.backward_recurrent = init_xavier({hidden, 4 * hidden}, rng);
  p.backward_bias = Tensor::zeros({1, 4 * hidden}, true);
  p.projection = init_xavier({2 * hidden, output_dim}, rng);
  p.projection_bias = Tensor::zeros({1, output_dim}, true);
  return p;
}

BiLstmParams BiLstmParams::zeros(std::size_t input_dim, std::size_t hidden,
                                 std::size_t output_dim) {
  BiLstmParams p;
  p.forward_input = Tensor::zeros({input_dim, 4 * hidden}, true);
  p.forward_recurrent = Tensor::zeros({hidden, 4 * hidden}, true);
  p.forward_bias = Tensor::zeros({1, 4 * hidden}, true);
  p.backward_input = Tensor::zeros({input_dim, 4 * hidden}, true);
  p.backward_recurrent = Tensor::zeros({hidden, 4 * hidden}, true);
  p.backward_bias = Tensor::zeros({1, 4 * hidden}, true);
  p.projection = Tensor::zeros({2 * hidden, output_dim}, true);
  p.projection_bias = Tensor::zeros({1, output_dim}, true);
  return p;
}

void BiLstmParams::collect(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".fw.input", forward_input});
  out.push_back({prefix + ".fw.recurrent", forward_recurrent});
  out.push_back({prefix + ".fw.bias", forward_bias});
  out.push_back({prefix + ".bw.input", backward_input});
  out.push_back({prefix + ".bw.recurrent", backward_recurrent});
  out.push_back({prefix + ".bw.bias", backward_bias});
  out.push_back({prefix + ".proj.weight", projection});
  out.push_back({prefix + ".proj.bias", projection_bias});
}

namespace {

std::vector<Tensor> run_direction(const Tensor& projected_inputs, const Tensor& recurrent,
                                  std::size_t hidden, bool reverse) {
  const std::size_t len = projected_inputs.rows();
  std::vector<Tensor> states(len);
  Tensor h = Tensor::zeros({1, hidden});
  Tensor c = Tensor::zeros({1, hidden});
  for (std::size_t step = 0; step < len; ++step) {
    const std::size_t t = reverse ? len - 1 - step : step;
    const Tensor gates = add(slice_rows(projected_inputs, t, 1), matmul(h, recurrent));
    const Tensor hc = lstm_cell(gates, c);
    h = slice_cols(hc, 0, hidden);
    c = slice_cols(hc, hidden, hidden);
    states[t] = h;
  }
  return states;
}

}  // namespace

Tensor bilstm_forward(const BiLstmParams& params, const Tensor& seq) {
  if (!seq.defined()) throw ContractError("bilstm_forward: empty sequence");
  if (seq.cols() != params.input_dim()) {
    throw ShapeError("bilstm_forward: sequence " + seq.shape().str() + " does not match input width " +
                     std::to_string(params.input_dim()));
  }
  const std::size_t hidden = params.hidden();
  const Tensor fw_in = add_row(matmul(seq, params.forward_input), params.forward_bias);
  const Tensor bw_in = add_row(matmul(seq, params.backward_input), params.backward_bias);
  const auto fw = run_direction(fw_in, params.forward_recurrent, hidden, false);
  const auto bw = run_direction(bw_in, params.backward_recurrent, hidden, true);
  const Tensor both[] = {concat_rows(fw), concat_rows(bw)};
  const Tensor states = concat_cols(both);
  return add_row(matmul(states, params.projection), params.projection_bias);
}

Tensor self_attention_layer(const AttentionLayer& layer, const Tensor& w) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(w.cols()));
  const Tensor weights = softmax_rows(scale(matmul_nt(w, w), inv_sqrt_d));
  return add_row(matmul(matmul(weights, w), layer.weight), layer.bias);
}

Tensor self_attention_stack(std::span<const AttentionLayer> layers, const Tensor& w0) {
  if (layers.empty()) throw ContractError("self_attention_stack: needs at least one layer");
  Tensor w = w0;
  for (const auto& layer : layers) w = self_attention_layer(layer, w);
  return w;
}

void ModeEncoderParams::collect(ParamList& out, const std::string& prefix) const {
  for (std::size_t s = 0; s < streams.size(); ++s) {
    streams[s].collect(out, prefix + ".lstm" + std::to_string(s));
  }
  for (std::size_t l = 0; l < attention.size(); ++l) {
    out.push_back({prefix + ".attn" + std::to_string(l) + ".weight", attention[l].weight});
    out.push_back({prefix + ".attn" + std::to_string(l) + ".bias", attention[l].bias});
  }
}

EncodedMode encode_mode(const ModeEncoderParams& params, std::span<const Tensor> streams,
                        std::string_view utterance_id) {
  const std::string where = utterance_id.empty() ? "" : " in utterance '" + std::string(utterance_id) + "'";
  if (streams.size() != params.streams.size()) {
    throw DataError("expected " + std::to_string(params.streams.size()) + " feature streams, got " +
                    std::to_string(streams.size()) + where);
  }
  std::vector<Tensor> encoded;
  encoded.reserve(streams.size());
  for (std::size_t s = 0; s < streams.size(); ++s) {
    if (!streams[s].defined()) throw DataError("missing feature stream" + where);
    if (s > 0 && streams[s].rows() != streams[0].rows()) {
      throw DataError("parallel streams differ in length (" + std::to_string(streams[0].rows()) +
                      " vs " + std::to_string(streams[s].rows()) + ")" + where);
    }
    encoded.push_back(bilstm_forward(params.streams[s], streams[s]));
  }
  const Tensor w0 = encoded.size() == 1 ? encoded.front() : concat_rows(encoded);
  EncodedMode out;
  out.full = self_attention_stack(params.attention, w0);
  out.pooled = mean_rows(out.full);
  return out;
}

std::vector<Stream> streams_of(Mode mode) {
  switch (mode) {
    case Mode::text: return {Stream::text};
    case Mode::video: return {Stream::video_face, Stream::video_back};
    case Mode::audio: return {Stream::audio};
  }
  return {};
}

EncoderParams EncoderParams::init(const EncoderConfig& config, Rng& rng) {
  config.validate();
  EncoderParams params;
  for (Mode m : kModes) {
    auto& mode = params.modes[index_of(m)];
    const std::size_t d = config.output_dims[index_of(m)];
    for (Stream s : streams_of(m)) {
      mode.streams.push_back(
          BiLstmParams::init(config.input_dims[index_of(s)], config.lstm_hidden, d, rng));
    }
    for (std::size_t l = 0; l < config.attention_layers; ++l) {
      mode.attention.push_back({init_xavier({d, d}, rng), Tensor::zeros({1, d}, true)});
    }
  }
  return params;
}

void EncoderParams::collect(ParamList& out) const {
  for (Mode m : kModes) modes[index_of(m)].collect(out, "enc." + std::string(mode_name(m)));
}

}  // namespace cmerc::encoders
