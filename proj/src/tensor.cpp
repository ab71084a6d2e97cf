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


#include "cmerc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "cmerc/errors.hpp"

namespace cmerc {

namespace {
thread_local Tape* g_active_tape = nullptr;
}

std::string Shape::str() const {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape.rows == 0 || shape.cols == 0) {
    throw ShapeError("tensor dimensions must be positive, got " + shape.str());
  }
  if (values.size() != shape.size()) {
    throw ShapeError("tensor of shape " + shape.str() + " given " +
                     std::to_string(values.size()) + " values");
  }
  node_ = std::make_shared<detail::Node>();
  node_->shape = shape;
  node_->value = std::move(values);
  set_requires_grad(requires_grad);
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return Tensor(shape, std::vector<double>(shape.size(), 0.0), requires_grad);
}

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
  return Tensor(shape, std::vector<double>(shape.size(), value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1, 1}, {value}, requires_grad);
}

Tensor Tensor::row(std::vector<double> values, bool requires_grad) {
  const Shape shape{1, values.size()};
  return Tensor(shape, std::move(values), requires_grad);
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows,
                      bool requires_grad) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged matrix literal");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(values), requires_grad);
}

const Shape& Tensor::shape() const {
  static const Shape empty{};
  return node_ ? node_->shape : empty;
}

std::span<const double> Tensor::values() const {
  if (!node_) return {};
  return node_->value;
}

std::span<double> Tensor::mutable_values() {
  if (!node_) return {};
  return node_->value;
}

double Tensor::at(std::size_t r, std::size_t c) const {
  if (r >= rows() || c >= cols()) {
    throw ShapeError("index (" + std::to_string(r) + "," + std::to_string(c) +
                     ") out of range for " + shape().str());
  }
  return node_->value[r * cols() + c];
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on non-scalar " + shape().str());
  return node_->value[0];
}

std::vector<double> Tensor::to_vector() const {
  auto v = values();
  return {v.begin(), v.end()};
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool on) {
  if (!node_) return;
  node_->requires_grad = on;
  if (on) {
    node_->grad.assign(node_->value.size(), 0.0);
  } else {
    node_->grad.clear();
    node_->grad.shrink_to_fit();
  }
}

std::span<const double> Tensor::grad() const {
  if (!node_) return {};
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (!node_) return {};
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::clone() const {
  if (!node_) return {};
  return Tensor(node_->shape, node_->value, false);
}

Tape::~Tape() {
  if (g_active_tape == this) g_active_tape = nullptr;
}

void Tape::record(std::shared_ptr<detail::Node> output, BackwardFn fn) {
  entries_.push_back({std::move(output), std::move(fn)});
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward requires a scalar loss, got " + loss.shape().str());
  }
  if (!loss.requires_grad()) return;
  loss.node()->grad[0] += 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    const auto& g = it->output->grad;
    if (std::all_of(g.begin(), g.end(), [](double x) { return x == 0.0; })) continue;
    it->fn();
  }
}

Tape* Tape::active() { return g_active_tape; }

Tape::Scope::Scope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }

Tape::Scope::~Scope() { g_active_tape = previous_; }

void backward(const Tensor& loss, Tape& tape) { tape.backward(loss); }

}  // namespace cmerc
