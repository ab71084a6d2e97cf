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


#include "cmerc/man.hpp"

#include <cmath>
#include <string>

#include "cmerc/errors.hpp"
#include "cmerc/ops.hpp"

namespace cmerc::man {

void ManConfig::validate() const {
  if (mode_dims.size() < 2) throw ContractError("MAN needs at least two modes");
  for (auto d : mode_dims) {
    if (d == 0) throw ContractError("MAN mode widths must be positive");
  }
  if (layers == 0 || width == 0 || heads == 0 || num_classes < 2) {
    throw ContractError("MAN layers, width and heads must be positive and num_classes >= 2");
  }
}

std::size_t ManParams::heads() const {
  if (central.empty() || central.front().attention.empty()) return 0;
  return central.front().attention.front().size();
}

std::vector<std::size_t> peripherals_of(std::size_t central, std::size_t num_modes) {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < num_modes; ++m) {
    if (m != central) out.push_back(m);
  }
  return out;
}

ManParams ManParams::init(const ManConfig& config, Rng& rng) {
  config.validate();
  const std::size_t modes = config.mode_dims.size();
  ManParams params;
  params.central.resize(modes);
  for (std::size_t m = 0; m < modes; ++m) {
    auto& net = params.central[m];
    std::size_t in = config.mode_dims[m];
    for (std::size_t l = 0; l < config.layers; ++l) {
      net.layers.push_back({init_xavier({in, config.width}, rng),
                            Tensor::zeros({1, config.width}, true)});
      in = config.width;
      std::vector<HeadAttention> heads(config.heads);
      for (auto& head : heads) {
        for (std::size_t p : peripherals_of(m, modes)) {
          head.keys.push_back(init_xavier({config.mode_dims[p], config.width}, rng));
          head.values.push_back(init_xavier({config.mode_dims[p], config.width}, rng));
        }
        head.gain = Tensor::scalar(1.0, true);
      }
      net.attention.push_back(std::move(heads));
    }
    net.classifier = {init_xavier({config.width, config.num_classes}, rng),
                      Tensor::zeros({1, config.num_classes}, true)};
  }
  return params;
}

void ManParams::collect(ParamList& out) const {
  for (std::size_t m = 0; m < central.size(); ++m) {
    const auto& net = central[m];
    const std::string base = "man.c" + std::to_string(m);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const std::string layer = base + ".l" + std::to_string(l);
      out.push_back({layer + ".weight", net.layers[l].weight});
      out.push_back({layer + ".bias", net.layers[l].bias});
      for (std::size_t h = 0; h < net.attention[l].size(); ++h) {
        const auto& head = net.attention[l][h];
        const std::string hp = layer + ".h" + std::to_string(h);
        for (std::size_t j = 0; j < head.keys.size(); ++j) {
          out.push_back({hp + ".key" + std::to_string(j), head.keys[j]});
          out.push_back({hp + ".value" + std::to_string(j), head.values[j]});
        }
        out.push_back({hp + ".gain", head.gain});
      }
    }
    out.push_back({base + ".cls.weight", net.classifier.weight});
    out.push_back({base + ".cls.bias", net.classifier.bias});
  }
}

KeyValue peripheral_kv(const Tensor& peripheral, const Tensor& key_weight,
                       const Tensor& value_weight) {
  if (key_weight.shape() != value_weight.shape()) {
    throw ShapeError("peripheral_kv: key " + key_weight.shape().str() + " and value " +
                     value_weight.shape().str() + " projections differ");
  }
  return {matmul(peripheral, key_weight), matmul(peripheral, value_weight)};
}

Tensor attention_injection(const Tensor& g, std::span<const KeyValue> peripherals,
                           const Tensor& gain, std::size_t num_modes) {
  if (peripherals.empty()) throw ContractError("cross attention needs at least one peripheral mode");
  if (num_modes < 2) throw ContractError("cross attention needs |M| >= 2");
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(g.cols()));
  std::vector<Tensor> terms;
  terms.reserve(peripherals.size());
  for (const auto& kv : peripherals) {
    const Tensor scores = scale_by(scale(matmul_nt(g, kv.keys), inv_sqrt_d), gain);
    terms.push_back(matmul(softmax_rows(scores), kv.values));
  }
  return scale(add_n(terms), 1.0 / static_cast<double>(num_modes));
}

Tensor cross_attend_layer(const Tensor& g, std::span<const KeyValue> peripherals,
                          const Tensor& gain, std::size_t num_modes) {
  return add(g, attention_injection(g, peripherals, gain, num_modes));
}

Tensor classify(const DenseLayer& classifier, const Tensor& descriptor) {
  return softmax_rows(add_row(matmul(descriptor, classifier.weight), classifier.bias));
}

std::vector<CrossAttendedDescriptor> man_forward(std::span<const Tensor> encoded,
                                                 const ManParams& params) {
  const std::size_t modes = params.num_modes();
  if (modes < 2) throw ContractError("man_forward needs at least two modes");
  if (encoded.size() != modes) {
    throw ContractError("man_forward: got " + std::to_string(encoded.size()) + " encoded modes, expected " +
                        std::to_string(modes));
  }
  std::vector<CrossAttendedDescriptor> out;
  out.reserve(modes);
  for (std::size_t m = 0; m < modes; ++m) {
    const auto& net = params.central[m];
    const auto peripherals = peripherals_of(m, modes);
    Tensor g = encoded[m];
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const Tensor input = l == 0 ? g : relu(g);
      const Tensor q = add_row(matmul(input, net.layers[l].weight), net.layers[l].bias);
      std::vector<Tensor> injections;
      injections.reserve(net.attention[l].size());
      for (const auto& head : net.attention[l]) {
        std::vector<KeyValue> kvs;
        kvs.reserve(peripherals.size());
        for (std::size_t j = 0; j < peripherals.size(); ++j) {
          kvs.push_back(peripheral_kv(encoded[peripherals[j]], head.keys[j], head.values[j]));
        }
        injections.push_back(attention_injection(q, kvs, head.gain, modes));
      }
      const double inv_heads = 1.0 / static_cast<double>(injections.size());
      g = add(q, scale(add_n(injections), inv_heads));
    }
    CrossAttendedDescriptor d;
    d.mode = m;
    d.descriptor = mean_rows(g);
    d.logits = add_row(matmul(d.descriptor, net.classifier.weight), net.classifier.bias);
    d.probs = softmax_rows(d.logits);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace cmerc::man
