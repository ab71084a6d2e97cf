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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cmerc/rng.hpp"
#include "cmerc/tensor.hpp"

namespace cmerc {

// Uniform in ±sqrt(6 / (fan_in + fan_out)) with fan_in = rows and
// fan_out = cols. The result is a trainable leaf.
Tensor init_xavier(Shape shape, Rng& rng);

struct NamedParam {
  std::string name;
  Tensor tensor;
};
using ParamList = std::vector<NamedParam>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
  double max_abs_error = 0.0;
  // Relative error over coordinates with |a| + |n| >= significance only.
  // Below that the central difference is dominated by round-off.
  double significant_rel_error = 0.0;
};

// Compares tape gradients of the scalar `loss` against central differences
// for every coordinate of every listed parameter. The relative error of a
// coordinate is |a - n| / (|a| + |n| + 1e-12). Parameter values are restored
// bit-exactly afterwards.
GradCheckReport finite_diff_report(const std::function<Tensor()>& loss, const ParamList& params,
                                   double step = 1e-5, double significance = 1e-6);

double finite_diff_check(const std::function<Tensor()>& loss, const ParamList& params,
                         double step = 1e-5);

// Single-input form: `f` is evaluated on `x` itself, which is perturbed in place.
double finite_diff_check(const std::function<Tensor(const Tensor&)>& f, Tensor x,
                         double step = 1e-5);

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Global gradient-norm clip across one step's parameters; 0 disables it.
  double max_grad_norm = 0.0;
};

struct ParamGroup {
  ParamList params;
  double lr_scale = 1.0;
};

// Adam with bias correction. Moment buffers are keyed by parameter name so
// groups can be regrouped between training stages and restored from disk.
class Adam {
 public:
  struct Moments {
    std::size_t steps = 0;
    std::vector<double> first;
    std::vector<double> second;
  };

  explicit Adam(AdamOptions options = {}) : options_(options) {}

  const AdamOptions& options() const { return options_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }

  // Applies one update from the accumulated gradients, then zeroes them.
  void step(std::span<const ParamGroup> groups);

  const std::map<std::string, Moments>& state() const { return state_; }
  std::map<std::string, Moments>& mutable_state() { return state_; }

 private:
  AdamOptions options_;
  std::map<std::string, Moments> state_;
};

void zero_grads(const ParamList& params);

}  // namespace cmerc
