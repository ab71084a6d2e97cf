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

// Straight-line references for the attention network and the contrastive
// objectives, shared by the unit tests and the acceptance run.

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cmerc/config.hpp"
#include "cmerc/data.hpp"
#include "cmerc/losses.hpp"
#include "cmerc/man.hpp"
#include "oracle.hpp"

namespace reference {

using cmerc::Rng;
using cmerc::Tensor;
using oracle::Mat;
using oracle::Vec;

// Xavier init has zero biases and unit gains; perturb them so the oracle
// sees every parameter.
inline cmerc::man::ManParams random_params(const cmerc::man::ManConfig& config, Rng& rng) {
  cmerc::man::ManParams p = cmerc::man::ManParams::init(config, rng);
  cmerc::ParamList list;
  p.collect(list);
  for (auto& np : list) {
    if (np.name.ends_with(".bias")) {
      for (double& v : np.tensor.mutable_values()) v = rng.uniform(-0.3, 0.3);
    } else if (np.name.ends_with(".gain")) {
      np.tensor.mutable_values()[0] = rng.uniform(0.5, 1.5);
    }
  }
  return p;
}

inline std::vector<Tensor> random_encoded(const cmerc::man::ManConfig& config, std::vector<std::size_t> lengths, Rng& rng) {
  std::vector<Tensor> out;
  for (std::size_t m = 0; m < config.mode_dims.size(); ++m) {
    out.push_back(oracle::random_tensor({lengths[m], config.mode_dims[m]}, rng));
  }
  return out;
}

// Residual cross-attention straight from the formula, one head.
inline Mat injection_oracle(const Mat& g, const std::vector<Mat>& peripherals, const std::vector<Mat>& key_w,
                     const std::vector<Mat>& value_w, double gain, std::size_t num_modes) {
  const double d = static_cast<double>(g.front().size());
  Mat total(g.size(), Vec(g.front().size(), 0.0));
  for (std::size_t i = 0; i < peripherals.size(); ++i) {
    const Mat k = oracle::mm(peripherals[i], key_w[i]);
    const Mat v = oracle::mm(peripherals[i], value_w[i]);
    Mat scores = oracle::scale(oracle::mm(g, oracle::transpose(k)), gain / std::sqrt(d));
    total = oracle::add(total, oracle::mm(oracle::softmax_rows(scores), v));
  }
  return oracle::scale(total, 1.0 / static_cast<double>(num_modes));
}

struct OracleOutput {
  Vec descriptor;
  Vec probs;
};

inline std::vector<OracleOutput> man_oracle(const std::vector<Tensor>& encoded,
                                           const cmerc::man::ManParams& p) {
  const std::size_t modes = encoded.size();
  std::vector<OracleOutput> out;
  for (std::size_t m = 0; m < modes; ++m) {
    const auto& net = p.central[m];
    std::vector<Mat> peripherals;
    for (std::size_t i = 0; i < modes; ++i) {
      if (i != m) peripherals.push_back(oracle::to_mat(encoded[i]));
    }
    Mat g = oracle::to_mat(encoded[m]);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const Mat input = l == 0 ? g : oracle::relu(g);
      const Mat q = oracle::add_bias(oracle::mm(input, oracle::to_mat(net.layers[l].weight)),
                                     net.layers[l].bias.to_vector());
      Mat heads(q.size(), Vec(q.front().size(), 0.0));
      for (const auto& head : net.attention[l]) {
        std::vector<Mat> kw, vw;
        for (std::size_t j = 0; j < head.keys.size(); ++j) {
          kw.push_back(oracle::to_mat(head.keys[j]));
          vw.push_back(oracle::to_mat(head.values[j]));
        }
        heads = oracle::add(heads, injection_oracle(q, peripherals, kw, vw, head.gain.item(), modes));
      }
      g = oracle::add(q, oracle::scale(heads, 1.0 / static_cast<double>(net.attention[l].size())));
    }
    OracleOutput o;
    o.descriptor = oracle::mean_rows(g);
    const Mat logits = oracle::add_bias(oracle::mm({o.descriptor}, oracle::to_mat(net.classifier.weight)),
                                        net.classifier.bias.to_vector());
    o.probs = oracle::softmax(logits[0]);
    out.push_back(o);
  }
  return out;
}

// Contrastive term written out from the formula, candidate by candidate.
inline double nce_oracle(const oracle::Vec& q, const oracle::Vec& pos, const std::vector<oracle::Vec>& negs,
                  double nu, double tau, cmerc::losses::NceForm form) {
  oracle::Vec logits{oracle::cosine(q, pos) / tau};
  for (const auto& n : negs) logits.push_back(oracle::cosine(q, n) / tau);
  const oracle::Vec p = oracle::softmax(logits);
  double loss = -std::log(p[0] / (p[0] + nu));
  for (std::size_t k = 1; k < p.size(); ++k) {
    if (form == cmerc::losses::NceForm::printed) {
      loss += std::log(p[k] / (p[k] + nu));
    } else {
      loss -= std::log(nu / (p[k] + nu));
    }
  }
  return form == cmerc::losses::NceForm::printed ? loss - 1.0 : loss;
}

inline std::vector<std::vector<Tensor>> random_batch(std::size_t n, std::size_t modes, std::size_t d, Rng& rng) {
  std::vector<std::vector<Tensor>> out(n);
  for (auto& sample : out)
    for (std::size_t m = 0; m < modes; ++m) sample.push_back(oracle::random_tensor({1, d}, rng));
  return out;
}

inline double ace_oracle(const std::vector<std::vector<Tensor>>& f, const std::vector<std::vector<std::size_t>>& negs,
                  std::size_t pool, double tau, cmerc::losses::NceForm form) {
  const std::size_t modes = f.front().size();
  double total = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double nu = static_cast<double>(negs[j].size()) / static_cast<double>(pool);
    double per_sample = 0.0;
    for (std::size_t m = 0; m < modes; ++m) {
      for (std::size_t mi = 0; mi < modes; ++mi) {
        if (m == mi) continue;
        std::vector<oracle::Vec> keys;
        for (std::size_t k : negs[j]) keys.push_back(f[k][mi].to_vector());
        per_sample += nce_oracle(f[j][m].to_vector(), f[j][mi].to_vector(), keys, nu, tau, form);
      }
    }
    total += per_sample / static_cast<double>(modes);
  }
  return total / static_cast<double>(f.size());
}

// Mean over modes of the per-mode focal terms, each averaged over samples.
inline double averaged_focal_oracle(const std::vector<std::vector<double>>& p, double gamma) {
  double total = 0.0;
  for (const auto& mode : p) {
    double s = 0.0;
    for (double q : mode) s += -std::pow(1.0 - q, gamma) * std::log(q);
    total += s / static_cast<double>(mode.size());
  }
  return total / static_cast<double>(p.size());
}

// Three samples through a small MAN, for the objectives and their gradients.
struct TinyMan {
  cmerc::man::ManParams params;
  std::vector<std::vector<Tensor>> inputs;  // [sample][mode]
  std::vector<std::size_t> labels;
  std::vector<std::vector<std::size_t>> negatives;

  explicit TinyMan(Rng& rng) {
    cmerc::man::ManConfig config{{3, 2, 3}, 2, 3, 2, 3};
    params = cmerc::man::ManParams::init(config, rng);
    for (std::size_t j = 0; j < 3; ++j) {
      inputs.push_back({oracle::random_tensor({2, 3}, rng), oracle::random_tensor({3, 2}, rng),
                        oracle::random_tensor({1, 3}, rng)});
    }
    labels = {0, 2, 1};
    negatives = {{1, 2}, {0, 2}, {0}};
  }

  std::pair<Tensor, Tensor> losses(cmerc::losses::NceForm form) const {
    std::vector<std::vector<Tensor>> descriptors(3);
    std::vector<std::vector<Tensor>> probs(3);
    for (std::size_t j = 0; j < 3; ++j) {
      const auto out = cmerc::man::man_forward(inputs[j], params);
      for (std::size_t m = 0; m < 3; ++m) {
        descriptors[j].push_back(out[m].descriptor);
        probs[m].push_back(out[m].probs);
      }
    }
    return {cmerc::losses::ace_loss(descriptors, negatives, 20, 0.5, form),
            cmerc::losses::averaged_focal(probs, labels, 1.0)};
  }

  cmerc::ParamList param_list() const {
    cmerc::ParamList list;
    params.collect(list);
    return list;
  }
};

inline cmerc::RunConfig pipeline_config() {
  cmerc::RunConfig config;
  config.num_classes = 3;
  config.stream_dims = {3, 2, 2, 2};
  config.lstm_hidden = 2;
  config.encoder_dim = 3;
  config.attention_layers = 1;
  config.man_layers = 2;
  config.man_width = 3;
  config.heads = 2;
  config.context_hidden = 2;
  config.context_dim = 2;
  return config;
}

inline cmerc::data::Utterance random_utterance(const std::string& id, const std::string& speaker, Rng& rng) {
  cmerc::data::Utterance u;
  u.utterance_id = id;
  u.speaker_id = speaker;
  u.label = rng.index(3);
  // Two or more frames: a single-position softmax makes key gradients exactly zero.
  const std::size_t frames = 2 + rng.index(2);
  const std::array<std::size_t, 4> widths{3, 2, 2, 2};
  for (std::size_t s = 0; s < 4; ++s) {
    u.features[s] = oracle::random_tensor({s == 0 ? frames + 1 : frames, widths[s]}, rng);
  }
  return u;
}

}  // namespace reference
