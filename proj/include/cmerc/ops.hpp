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
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "cmerc/tensor.hpp"

// Differentiable matrix ops. Each op records a backward closure on the active
// tape when at least one input requires a gradient; otherwise it is a plain
// forward computation. All ops reject non-finite results with NumericError.
namespace cmerc {

Tensor matmul(const Tensor& a, const Tensor& b);
// a · bᵀ without materializing the transpose.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// Sum of same-shape tensors, accumulated left to right.
Tensor add_n(std::span<const Tensor> terms);
// a (r×c) + bias (1×c) broadcast over rows.
Tensor add_row(const Tensor& a, const Tensor& bias);
Tensor scale(const Tensor& a, double factor);
// a scaled by a learnable 1×1 tensor.
Tensor scale_by(const Tensor& a, const Tensor& factor);
Tensor add_scalar(const Tensor& a, double offset);

Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
// Natural log; every entry must be strictly positive.
Tensor log(const Tensor& a);

// Elementwise map with a caller-supplied derivative.
Tensor map_elementwise(const Tensor& a, const std::function<double(double)>& f,
                       const std::function<double(double)>& df, std::string_view name);

// Row-wise softmax stabilized by subtracting each row's maximum.
Tensor softmax_rows(const Tensor& x);

Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t count);

// Column means, 1×c.
Tensor mean_rows(const Tensor& a);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor dot(const Tensor& a, const Tensor& b);
// Cosine similarity of two 1×d rows; a zero-norm operand gives similarity 0.
Tensor cosine_similarity(const Tensor& a, const Tensor& b);
Tensor pick(const Tensor& a, std::size_t r, std::size_t c);

// One LSTM step. `gates` is the 1×4H pre-activation in i, f, g, o order and
// `cell` the previous 1×H cell state; returns [h, c] as a 1×2H row.
Tensor lstm_cell(const Tensor& gates, const Tensor& cell);

}  // namespace cmerc
