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


#include "cmerc/ops.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <utility>

#include "cmerc/errors.hpp"

namespace cmerc {

namespace {

using NodePtr = std::shared_ptr<detail::Node>;

void require_defined(const Tensor& t, std::string_view op) {
  if (!t.defined()) throw ContractError(std::string(op) + ": undefined operand");
}

bool tracking(std::initializer_list<const Tensor*> inputs) {
  if (Tape::active() == nullptr) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t->requires_grad(); });
}

bool tracking(std::span<const Tensor> inputs) {
  if (Tape::active() == nullptr) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor& t) { return t.requires_grad(); });
}

Tensor finish(Shape shape, std::vector<double> values, bool track, std::string_view op) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(op) + " produced a non-finite value");
    }
  }
  return Tensor(shape, std::move(values), track);
}

void record(const Tensor& out, Tape::BackwardFn fn) {
  Tape::active()->record(out.shared(), std::move(fn));
}

void require_same_shape(const Tensor& a, const Tensor& b, std::string_view op) {
  require_defined(a, op);
  require_defined(b, op);
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                     b.shape().str());
  }
}

template <typename Forward, typename Derivative>
Tensor unary(const Tensor& a, std::string_view name, Forward f, Derivative df) {
  require_defined(a, name);
  const auto in = a.values();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  const bool track = tracking({&a});
  Tensor result = finish(a.shape(), std::move(out), track, name);
  if (track) {
    // df receives (input, output).
    record(result, [o = result.node(), an = a.shared(), df] {
      if (!an->requires_grad) return;
      for (std::size_t i = 0; i < o->grad.size(); ++i) {
        an->grad[i] += o->grad[i] * df(an->value[i], o->value[i]);
      }
    });
  }
  return result;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ, " + a.shape().str() + " x " +
                     b.shape().str());
  }
  const std::size_t r = a.rows(), k = a.cols(), c = b.cols();
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(r * c, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      for (std::size_t j = 0; j < c; ++j) out[i * c + j] += aip * bv[p * c + j];
    }
  }
  const bool track = tracking({&a, &b});
  Tensor result = finish({r, c}, std::move(out), track, "matmul");
  if (track) {
    record(result, [o = result.node(), an = a.shared(), bn = b.shared(), r, k, c] {
      const auto& g = o->grad;
      if (an->requires_grad) {
        for (std::size_t i = 0; i < r; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            double s = 0.0;
            for (std::size_t j = 0; j < c; ++j) s += g[i * c + j] * bn->value[p * c + j];
            an->grad[i * k + p] += s;
          }
        }
      }
      if (bn->requires_grad) {
        for (std::size_t i = 0; i < r; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            const double aip = an->value[i * k + p];
            for (std::size_t j = 0; j < c; ++j) bn->grad[p * c + j] += aip * g[i * c + j];
          }
        }
      }
    });
  }
  return result;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul_nt");
  require_defined(b, "matmul_nt");
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: row widths differ, " + a.shape().str() + " x " +
                     b.shape().str() + "^T");
  }
  const std::size_t r = a.rows(), k = a.cols(), c = b.rows();
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(r * c, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += av[i * k + p] * bv[j * k + p];
      out[i * c + j] = s;
    }
  }
  const bool track = tracking({&a, &b});
  Tensor result = finish({r, c}, std::move(out), track, "matmul_nt");
  if (track) {
    record(result, [o = result.node(), an = a.shared(), bn = b.shared(), r, k, c] {
      const auto& g = o->grad;
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
          const double gij = g[i * c + j];
          if (gij == 0.0) continue;
          if (an->requires_grad) {
            for (std::size_t p = 0; p < k; ++p) an->grad[i * k + p] += gij * bn->value[j * k + p];
          }
          if (bn->requires_grad) {
            for (std::size_t p = 0; p < k; ++p) bn->grad[j * k + p] += gij * an->value[i * k + p];
          }
        }
      }
    });
  }
  return result;
}

Tensor transpose(const Tensor& a) {
  require_defined(a, "transpose");
  const std::size_t r = a.rows(), c = a.cols();
  const auto av = a.values();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = av[i * c + j];
  const bool track = tracking({&a});
  Tensor result = finish({c, r}, std::move(out), track, "transpose");
  if (track) {
    record(result, [o = result.node(), an = a.shared(), r, c] {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) an->grad[i * c + j] += o->grad[j * r + i];
    });
  }
  return result;
}

namespace {

template <typename Combine, typename GradA, typename GradB>
Tensor binary(const Tensor& a, const Tensor& b, std::string_view name, Combine f, GradA ga,
              GradB gb) {
  require_same_shape(a, b, name);
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i], bv[i]);
  const bool track = tracking({&a, &b});
  Tensor result = finish(a.shape(), std::move(out), track, name);
  if (track) {
    record(result, [o = result.node(), an = a.shared(), bn = b.shared(), ga, gb] {
      for (std::size_t i = 0; i < o->grad.size(); ++i) {
        const double g = o->grad[i];
        if (an->requires_grad) an->grad[i] += g * ga(an->value[i], bn->value[i]);
        if (bn->requires_grad) bn->grad[i] += g * gb(an->value[i], bn->value[i]);
      }
    });
  }
  return result;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor add_n(std::span<const Tensor> terms) {
  if (terms.empty()) throw ContractError("add_n: no terms");
  for (const auto& t : terms) require_same_shape(terms.front(), t, "add_n");
  std::vector<double> out(terms.front().size(), 0.0);
  for (const auto& t : terms) {
    const auto v = t.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
  }
  const bool track = tracking(terms);
  Tensor result = finish(terms.front().shape(), std::move(out), track, "add_n");
  if (track) {
    std::vector<NodePtr> nodes;
    nodes.reserve(terms.size());
    for (const auto& t : terms) nodes.push_back(t.shared());
    record(result, [o = result.node(), nodes = std::move(nodes)] {
      for (const auto& n : nodes) {
        if (!n->requires_grad) continue;
        for (std::size_t i = 0; i < o->grad.size(); ++i) n->grad[i] += o->grad[i];
      }
    });
  }
  return result;
}

Tensor add_row(const Tensor& a, const Tensor& bias) {
  require_defined(a, "add_row");
  require_defined(bias, "add_row");
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    throw ShapeError("add_row: bias " + bias.shape().str() + " does not broadcast over " +
                     a.shape().str());
  }
  const std::size_t r = a.rows(), c = a.cols();
  const auto av = a.values();
  const auto bv = bias.values();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = av[i * c + j] + bv[j];
  const bool track = tracking({&a, &bias});
  Tensor result = finish(a.shape(), std::move(out), track, "add_row");
  if (track) {
    record(result, [o = result.node(), an = a.shared(), bn = bias.shared(), r, c] {
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
          const double g = o->grad[i * c + j];
          if (an->requires_grad) an->grad[i * c + j] += g;
          if (bn->requires_grad) bn->grad[j] += g;
        }
      }
    });
  }
  return result;
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      a, "scale", [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Tensor scale_by(const Tensor& a, const Tensor& factor) {
  require_defined(a, "scale_by");
  require_defined(factor, "scale_by");
  if (factor.size() != 1) throw ShapeError("scale_by: factor must be 1x1, got " + factor.shape().str());
  const double s = factor.item();
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = s * av[i];
  const bool track = tracking({&a, &factor});
  Tensor result = finish(a.shape(), std::move(out), track, "scale_by");
  if (track) {
    record(result, [o = result.node(), an = a.shared(), fn = factor.shared()] {
      const double s = fn->value[0];
      double gs = 0.0;
      for (std::size_t i = 0; i < o->grad.size(); ++i) {
        if (an->requires_grad) an->grad[i] += s * o->grad[i];
        gs += an->value[i] * o->grad[i];
      }
      if (fn->requires_grad) fn->grad[0] += gs;
    });
  }
  return result;
}

Tensor add_scalar(const Tensor& a, double offset) {
  return unary(
      a, "add_scalar", [offset](double x) { return x + offset; },
      [](double, double) { return 1.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(a, "sigmoid", stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& a) {
  return unary(
      a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  require_defined(a, "log");
  for (double v : a.values()) {
    if (!(v > 0.0)) throw NumericError("log of non-positive value " + std::to_string(v));
  }
  return unary(
      a, "log", [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Tensor map_elementwise(const Tensor& a, const std::function<double(double)>& f,
                       const std::function<double(double)>& df, std::string_view name) {
  return unary(a, name, f, [df](double x, double) { return df(x); });
}

Tensor softmax_rows(const Tensor& x) {
  require_defined(x, "softmax_rows");
  const std::size_t r = x.rows(), c = x.cols();
  const auto xv = x.values();
  for (double v : xv) {
    if (!std::isfinite(v)) throw NumericError("softmax_rows: non-finite input");
  }
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = xv.data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      out[i * c + j] = std::exp(row[j] - mx);
      total += out[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= total;
  }
  const bool track = tracking({&x});
  Tensor result = finish(x.shape(), std::move(out), track, "softmax_rows");
  if (track) {
    record(result, [o = result.node(), xn = x.shared(), r, c] {
      for (std::size_t i = 0; i < r; ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < c; ++j) inner += o->grad[i * c + j] * o->value[i * c + j];
        for (std::size_t j = 0; j < c; ++j) {
          xn->grad[i * c + j] += o->value[i * c + j] * (o->grad[i * c + j] - inner);
        }
      }
    });
  }
  return result;
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no parts");
  const std::size_t r = parts.front().rows();
  std::size_t c = 0;
  for (const auto& p : parts) {
    require_defined(p, "concat_cols");
    if (p.rows() != r) {
      throw ShapeError("concat_cols: row counts differ, " + parts.front().shape().str() +
                       " vs " + p.shape().str());
    }
    c += p.cols();
  }
  std::vector<double> out(r * c);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    const auto v = p.values();
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(v.data() + i * p.cols(), p.cols(), out.data() + i * c + off);
    off += p.cols();
  }
  const bool track = tracking(parts);
  Tensor result = finish({r, c}, std::move(out), track, "concat_cols");
  if (track) {
    std::vector<NodePtr> nodes;
    for (const auto& p : parts) nodes.push_back(p.shared());
    record(result, [o = result.node(), nodes = std::move(nodes), offsets = std::move(offsets), r, c] {
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        auto& n = *nodes[k];
        if (!n.requires_grad) continue;
        const std::size_t w = n.shape.cols;
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < w; ++j) n.grad[i * w + j] += o->grad[i * c + offsets[k] + j];
      }
    });
  }
  return result;
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("concat_rows: no parts");
  const std::size_t c = parts.front().cols();
  std::size_t r = 0;
  for (const auto& p : parts) {
    require_defined(p, "concat_rows");
    if (p.cols() != c) {
      throw ShapeError("concat_rows: column counts differ, " + parts.front().shape().str() +
                       " vs " + p.shape().str());
    }
    r += p.rows();
  }
  std::vector<double> out;
  out.reserve(r * c);
  for (const auto& p : parts) {
    const auto v = p.values();
    out.insert(out.end(), v.begin(), v.end());
  }
  const bool track = tracking(parts);
  Tensor result = finish({r, c}, std::move(out), track, "concat_rows");
  if (track) {
    std::vector<NodePtr> nodes;
    for (const auto& p : parts) nodes.push_back(p.shared());
    record(result, [o = result.node(), nodes = std::move(nodes)] {
      std::size_t off = 0;
      for (const auto& n : nodes) {
        const std::size_t len = n->value.size();
        if (n->requires_grad) {
          for (std::size_t i = 0; i < len; ++i) n->grad[i] += o->grad[off + i];
        }
        off += len;
      }
    });
  }
  return result;
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count) {
  require_defined(a, "slice_cols");
  if (count == 0 || begin + count > a.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(begin) + ", +" + std::to_string(count) +
                     ") outside " + a.shape().str());
  }
  const std::size_t r = a.rows(), c = a.cols();
  const auto av = a.values();
  std::vector<double> out(r * count);
  for (std::size_t i = 0; i < r; ++i)
    std::copy_n(av.data() + i * c + begin, count, out.data() + i * count);
  const bool track = tracking({&a});
  Tensor result = finish({r, count}, std::move(out), track, "slice_cols");
  if (track) {
    record(result, [o = result.node(), an = a.shared(), begin, count, r, c] {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < count; ++j) an->grad[i * c + begin + j] += o->grad[i * count + j];
    });
  }
  return result;
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t count) {
  require_defined(a, "slice_rows");
  if (count == 0 || begin + count > a.rows()) {
    throw ShapeError("slice_rows: [" + std::to_string(begin) + ", +" + std::to_string(count) +
                     ") outside " + a.shape().str());
  }
  const std::size_t c = a.cols();
  const auto av = a.values();
  std::vector<double> out(av.begin() + static_cast<std::ptrdiff_t>(begin * c),
                          av.begin() + static_cast<std::ptrdiff_t>((begin + count) * c));
  const bool track = tracking({&a});
  Tensor result = finish({count, c}, std::move(out), track, "slice_rows");
  if (track) {
    record(result, [o = result.node(), an = a.shared(), off = begin * c] {
      for (std::size_t i = 0; i < o->grad.size(); ++i) an->grad[off + i] += o->grad[i];
    });
  }
  return result;
}

Tensor mean_rows(const Tensor& a) {
  require_defined(a, "mean_rows");
  const std::size_t r = a.rows(), c = a.cols();
  const auto av = a.values();
  std::vector<double> out(c, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j] += av[i * c + j];
  for (auto& v : out) v /= static_cast<double>(r);
  const bool track = tracking({&a});
  Tensor result = finish({1, c}, std::move(out), track, "mean_rows");
  if (track) {
    record(result, [o = result.node(), an = a.shared(), r, c] {
      const double inv = 1.0 / static_cast<double>(r);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) an->grad[i * c + j] += o->grad[j] * inv;
    });
  }
  return result;
}

Tensor sum(const Tensor& a) {
  require_defined(a, "sum");
  double total = 0.0;
  for (double v : a.values()) total += v;
  const bool track = tracking({&a});
  Tensor result = finish({1, 1}, {total}, track, "sum");
  if (track) {
    record(result, [o = result.node(), an = a.shared()] {
      for (auto& g : an->grad) g += o->grad[0];
    });
  }
  return result;
}

Tensor mean(const Tensor& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor dot(const Tensor& a, const Tensor& b) { return sum(mul(a, b)); }

Tensor cosine_similarity(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "cosine_similarity");
  const auto av = a.values();
  const auto bv = b.values();
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    ab += av[i] * bv[i];
    aa += av[i] * av[i];
    bb += bv[i] * bv[i];
  }
  const double na = std::sqrt(aa), nb = std::sqrt(bb);
  const bool degenerate = na == 0.0 || nb == 0.0;
  const double sim = degenerate ? 0.0 : ab / (na * nb);
  const bool track = tracking({&a, &b});
  Tensor result = finish({1, 1}, {sim}, track, "cosine_similarity");
  if (track && !degenerate) {
    record(result, [o = result.node(), an = a.shared(), bn = b.shared(), na, nb, sim] {
      const double g = o->grad[0];
      const double inv = 1.0 / (na * nb);
      for (std::size_t i = 0; i < an->value.size(); ++i) {
        const double x = an->value[i], y = bn->value[i];
        if (an->requires_grad) an->grad[i] += g * (y * inv - sim * x / (na * na));
        if (bn->requires_grad) bn->grad[i] += g * (x * inv - sim * y / (nb * nb));
      }
    });
  }
  return result;
}

Tensor pick(const Tensor& a, std::size_t r, std::size_t c) {
  const double v = a.at(r, c);
  const bool track = tracking({&a});
  Tensor result = finish({1, 1}, {v}, track, "pick");
  if (track) {
    record(result, [o = result.node(), an = a.shared(), idx = r * a.cols() + c] {
      an->grad[idx] += o->grad[0];
    });
  }
  return result;
}

Tensor lstm_cell(const Tensor& gates, const Tensor& cell) {
  require_defined(gates, "lstm_cell");
  require_defined(cell, "lstm_cell");
  const std::size_t h = cell.cols();
  if (cell.rows() != 1 || gates.rows() != 1 || gates.cols() != 4 * h) {
    throw ShapeError("lstm_cell: gates " + gates.shape().str() + " incompatible with cell " +
                     cell.shape().str());
  }
  const auto gv = gates.values();
  const auto cv = cell.values();
  // Cached activations: i, f, g, o, tanh(c).
  std::vector<double> act(5 * h);
  std::vector<double> out(2 * h);
  for (std::size_t j = 0; j < h; ++j) {
    const double i = stable_sigmoid(gv[j]);
    const double f = stable_sigmoid(gv[h + j]);
    const double g = std::tanh(gv[2 * h + j]);
    const double o = stable_sigmoid(gv[3 * h + j]);
    const double c = f * cv[j] + i * g;
    const double tc = std::tanh(c);
    act[j] = i;
    act[h + j] = f;
    act[2 * h + j] = g;
    act[3 * h + j] = o;
    act[4 * h + j] = tc;
    out[j] = o * tc;
    out[h + j] = c;
  }
  const bool track = tracking({&gates, &cell});
  Tensor result = finish({1, 2 * h}, std::move(out), track, "lstm_cell");
  if (track) {
    record(result, [o = result.node(), gn = gates.shared(), cn = cell.shared(),
                    act = std::move(act), h] {
      for (std::size_t j = 0; j < h; ++j) {
        const double i = act[j], f = act[h + j], g = act[2 * h + j], og = act[3 * h + j];
        const double tc = act[4 * h + j];
        const double dh = o->grad[j];
        const double dc = o->grad[h + j] + dh * og * (1.0 - tc * tc);
        if (gn->requires_grad) {
          gn->grad[j] += dc * g * i * (1.0 - i);
          gn->grad[h + j] += dc * cn->value[j] * f * (1.0 - f);
          gn->grad[2 * h + j] += dc * i * (1.0 - g * g);
          gn->grad[3 * h + j] += dh * tc * og * (1.0 - og);
        }
        if (cn->requires_grad) cn->grad[j] += dc * f;
      }
    });
  }
  return result;
}

}  // namespace cmerc
