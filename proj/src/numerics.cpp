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


#include "cmerc/numerics.hpp"

#include <cmath>

#include "cmerc/errors.hpp"

namespace cmerc {

Tensor init_xavier(Shape shape, Rng& rng) {
  if (shape.size() == 0) throw ShapeError("init_xavier: empty shape " + shape.str());
  const double bound = std::sqrt(6.0 / static_cast<double>(shape.rows + shape.cols));
  std::vector<double> values(shape.size());
  for (auto& v : values) v = rng.uniform(-bound, bound);
  return Tensor(shape, std::move(values), true);
}

namespace {

double evaluate(const std::function<Tensor()>& loss) {
  const Tensor value = loss();
  if (value.size() != 1) throw ContractError("gradient check needs a scalar loss");
  return value.item();
}

}  // namespace

GradCheckReport finite_diff_report(const std::function<Tensor()>& loss, const ParamList& params,
                                   double step, double significance) {
  if (!(step > 0.0)) throw ContractError("finite_diff_check: step must be positive");

  std::vector<bool> previously_tracked;
  for (const auto& p : params) {
    previously_tracked.push_back(p.tensor.requires_grad());
    Tensor t = p.tensor;
    t.set_requires_grad(true);
  }

  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    Tape::Scope scope(tape);
    const Tensor value = loss();
    tape.backward(value);
    for (const auto& p : params) {
      auto g = p.tensor.grad();
      analytic.emplace_back(g.begin(), g.end());
    }
  }

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor t = params[k].tensor;
    auto values = t.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + step;
      const double up = evaluate(loss);
      values[i] = original - step;
      const double down = evaluate(loss);
      values[i] = original;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[k][i];
      const double rel = std::abs(a - numeric) / (std::abs(a) + std::abs(numeric) + 1e-12);
      ++report.coordinates;
      report.max_abs_error = std::max(report.max_abs_error, std::abs(a - numeric));
      if (std::abs(a) + std::abs(numeric) >= significance) {
        report.significant_rel_error = std::max(report.significant_rel_error, rel);
      }
      if (report.worst_param.empty() || rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = params[k].name;
        report.worst_index = i;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }

  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor t = params[k].tensor;
    t.set_requires_grad(previously_tracked[k]);
  }
  return report;
}

double finite_diff_check(const std::function<Tensor()>& loss, const ParamList& params,
                         double step) {
  return finite_diff_report(loss, params, step).max_rel_error;
}

double finite_diff_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double step) {
  return finite_diff_check([&] { return f(x); }, ParamList{{"x", x}}, step);
}

void Adam::step(std::span<const ParamGroup> groups) {
  double scale_all = 1.0;
  if (options_.max_grad_norm > 0.0) {
    double sq = 0.0;
    for (const auto& group : groups)
      for (const auto& p : group.params)
        for (double g : p.tensor.grad()) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm > options_.max_grad_norm) scale_all = options_.max_grad_norm / norm;
  }
  for (const auto& group : groups) {
    const double lr = options_.learning_rate * group.lr_scale;
    for (const auto& p : group.params) {
      Tensor t = p.tensor;
      auto& m = state_[p.name];
      if (m.first.size() != t.size()) {
        m.first.assign(t.size(), 0.0);
        m.second.assign(t.size(), 0.0);
        m.steps = 0;
      }
      ++m.steps;
      const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(m.steps));
      const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(m.steps));
      auto values = t.mutable_values();
      auto grads = t.mutable_grad();
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double g = grads[i] * scale_all;
        m.first[i] = options_.beta1 * m.first[i] + (1.0 - options_.beta1) * g;
        m.second[i] = options_.beta2 * m.second[i] + (1.0 - options_.beta2) * g * g;
        const double mhat = m.first[i] / c1;
        const double vhat = m.second[i] / c2;
        values[i] -= lr * mhat / (std::sqrt(vhat) + options_.epsilon);
        grads[i] = 0.0;
      }
    }
  }
}

void zero_grads(const ParamList& params) {
  for (const auto& p : params) {
    Tensor t = p.tensor;
    t.zero_grad();
  }
}

}  // namespace cmerc
