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
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cmerc {

// Every tensor in the library is a row-major matrix. Vectors are 1×n rows and
// scalars are 1×1, which keeps every op a plain matrix op.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  // Allocated (zero-filled) exactly when requires_grad is set.
  std::vector<double> grad;
  bool requires_grad = false;
};

}  // namespace detail

// Shared handle to a value buffer plus an optional gradient buffer.
//
// Copies alias the same storage; use clone() for an independent copy. Values
// produced by ops are never written again, only leaves (parameters) are
// updated in place by optimizers and gradient checks.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor row(std::vector<double> values, bool requires_grad = false);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows,
                       bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rows() const { return shape().rows; }
  std::size_t cols() const { return shape().cols; }
  std::size_t size() const { return shape().size(); }

  std::span<const double> values() const;
  std::span<double> mutable_values();
  double at(std::size_t r, std::size_t c) const;
  double item() const;
  std::vector<double> to_vector() const;

  bool requires_grad() const;
  void set_requires_grad(bool on);
  // Empty span when the tensor does not track gradients.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Deep copy without gradient tracking.
  Tensor clone() const;

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& shared() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// Ordered record of differentiable ops executed while the tape is active on
// the current thread. Ops record only if some input requires a gradient.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  ~Tape();

  void record(std::shared_ptr<detail::Node> output, BackwardFn fn);
  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

  // Seeds d(loss)/d(loss) = 1 and replays the record in reverse. The loss
  // must be 1×1; a loss that does not depend on any tracked tensor is a no-op.
  void backward(const Tensor& loss);

  // Tape that ops currently record onto, or nullptr.
  static Tape* active();

  // Makes `tape` the active tape for the lifetime of the scope.
  class Scope {
   public:
    explicit Scope(Tape& tape);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Tape* previous_;
  };

 private:
  struct Entry {
    std::shared_ptr<detail::Node> output;
    BackwardFn fn;
  };
  std::vector<Entry> entries_;
};

void backward(const Tensor& loss, Tape& tape);

}  // namespace cmerc
