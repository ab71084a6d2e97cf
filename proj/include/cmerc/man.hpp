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
#include <vector>

#include "cmerc/numerics.hpp"
#include "cmerc/tensor.hpp"

// Multimodal attention network: one Central query network per mode whose
// dense layers are cross-attended by key/value projections of every other
// mode's encoder output.
namespace cmerc::man {

struct ManConfig {
  // Encoder output width d_m per mode; the number of entries is |M| >= 2.
  std::vector<std::size_t> mode_dims;
  std::size_t layers = 4;  // h
  std::size_t width = 8;   // d, shared by every layer
  std::size_t heads = 2;   // H
  std::size_t num_classes = 4;

  void validate() const;
};

struct DenseLayer {
  Tensor weight;
  Tensor bias;
};

// One head's projections at one layer. keys[j] and values[j] belong to the
// j-th peripheral mode in ascending mode order (the central mode skipped).
struct HeadAttention {
  std::vector<Tensor> keys;    // d_{m_i} × d_l, no bias
  std::vector<Tensor> values;  // d_{m_i} × d_l, no bias
  Tensor gain;                 // 1×1 scalar map applied to the scaled scores
};

struct CentralNetwork {
  std::vector<DenseLayer> layers;
  std::vector<std::vector<HeadAttention>> attention;  // [layer][head]
  DenseLayer classifier;                              // d × C, softmax on top
};

struct ManParams {
  std::vector<CentralNetwork> central;

  std::size_t num_modes() const { return central.size(); }
  std::size_t heads() const;

  static ManParams init(const ManConfig& config, Rng& rng);
  void collect(ParamList& out) const;
};

// Indices of every mode other than `central`, ascending.
std::vector<std::size_t> peripherals_of(std::size_t central, std::size_t num_modes);

struct KeyValue {
  Tensor keys;    // seq_i × d_l
  Tensor values;  // seq_i × d_l
};

KeyValue peripheral_kv(const Tensor& peripheral, const Tensor& key_weight,
                       const Tensor& value_weight);

// The additive cross-attention term of one head:
//   (1/num_modes) Σ_i softmax(gain · g Kᵢᵀ / sqrt(d_l)) Vᵢ
Tensor attention_injection(const Tensor& g, std::span<const KeyValue> peripherals,
                           const Tensor& gain, std::size_t num_modes);

// g + attention_injection(g, ...), one head of the residual layer.
Tensor cross_attend_layer(const Tensor& g, std::span<const KeyValue> peripherals,
                          const Tensor& gain, std::size_t num_modes);

struct CrossAttendedDescriptor {
  std::size_t mode = 0;
  Tensor descriptor;  // 1 × d
  Tensor logits;      // 1 × C
  Tensor probs;       // 1 × C
};

// Class probabilities of a Central network's classification head.
Tensor classify(const DenseLayer& classifier, const Tensor& descriptor);

std::vector<CrossAttendedDescriptor> man_forward(std::span<const Tensor> encoded,
                                                 const ManParams& params);

}  // namespace cmerc::man
