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


#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cmerc/errors.hpp"
#include "cmerc/numerics.hpp"
#include "cmerc/ops.hpp"
#include "cmerc/rng.hpp"
#include "cmerc/tensor.hpp"
#include "oracle.hpp"

namespace {

using cmerc::Rng;
using cmerc::Shape;
using cmerc::Tape;
using cmerc::Tensor;

constexpr double kGradTol = 1e-4;

TEST(Matmul, IdentityLeavesOperandUnchanged) {
  const Tensor eye = Tensor::matrix({{1, 0}, {0, 1}});
  const Tensor b = Tensor::matrix({{3, 4}, {5, 6}});
  EXPECT_EQ(cmerc::matmul(eye, b).to_vector(), (std::vector<double>{3, 4, 5, 6}));
}

TEST(Matmul, RowTimesColumn) {
  EXPECT_EQ(cmerc::matmul(Tensor::matrix({{1, 2}}), Tensor::matrix({{3}, {4}})).item(), 11.0);
}

TEST(Matmul, MatchesTripleLoop) {
  Rng rng(3);
  const Tensor a = oracle::random_tensor({3, 4}, rng);
  const Tensor b = oracle::random_tensor({4, 2}, rng);
  const auto expected = oracle::mm(oracle::to_mat(a), oracle::to_mat(b));
  EXPECT_LT(oracle::max_abs_diff(oracle::to_mat(cmerc::matmul(a, b)), expected), 1e-12);
  const auto nt = cmerc::matmul_nt(a, cmerc::transpose(b));
  EXPECT_LT(oracle::max_abs_diff(oracle::to_mat(nt), expected), 1e-12);
}

TEST(Matmul, MismatchNamesBothShapes) {
  const Tensor a = Tensor::zeros({2, 3});
  const Tensor b = Tensor::zeros({2, 3});
  try {
    cmerc::matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const cmerc::ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
  }
}

TEST(Softmax, EqualLogitsSplitEvenly) {
  const auto p = cmerc::softmax_rows(Tensor::row({1, 1})).to_vector();
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(Softmax, ExactExponentials) {
  const auto p = cmerc::softmax_rows(Tensor::row({0, std::log(3.0)})).to_vector();
  EXPECT_NEAR(p[0], 0.25, 1e-15);
  EXPECT_NEAR(p[1], 0.75, 1e-15);
}

TEST(Softmax, ShiftInvariantAndNormalized) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor x = oracle::random_tensor({4, 5}, rng, false, 3.0);
    const auto a = oracle::to_mat(cmerc::softmax_rows(x));
    const auto b = oracle::to_mat(cmerc::softmax_rows(cmerc::add_scalar(x, 7.0)));
    EXPECT_LT(oracle::max_abs_diff(a, b), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(a, oracle::softmax_rows(oracle::to_mat(x))), 1e-12);
    for (const auto& row : a) {
      double total = 0.0;
      for (double v : row) {
        EXPECT_GE(v, 0.0);
        total += v;
      }
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(Softmax, LargeLogitsStayFinite) {
  const auto p = cmerc::softmax_rows(Tensor::row({1000, 999})).to_vector();
  EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
}

TEST(Backward, SumGivesOnes) {
  Tensor x = Tensor::matrix({{1, -2, 3}, {4, 5, -6}}, true);
  Tape tape;
  {
    Tape::Scope scope(tape);
    cmerc::backward(cmerc::sum(x), tape);
  }
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, DotGradientsSwapOperands) {
  Tensor x = Tensor::row({1, 2, 3}, true);
  Tensor y = Tensor::row({-4, 5, 0.5}, true);
  Tape tape;
  {
    Tape::Scope scope(tape);
    cmerc::backward(cmerc::dot(x, y), tape);
  }
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), y.to_vector());
  EXPECT_EQ(std::vector<double>(y.grad().begin(), y.grad().end()), x.to_vector());
}

TEST(Backward, NonScalarLossRejected) {
  Tensor x = Tensor::row({1, 2}, true);
  Tape tape;
  Tape::Scope scope(tape);
  const Tensor y = cmerc::scale(x, 2.0);
  EXPECT_THROW(tape.backward(y), cmerc::ContractError);
}

TEST(Backward, EmptyTapeIsNoOp) {
  Tensor x = Tensor::row({1, 2}, true);
  Tape tape;
  EXPECT_NO_THROW(tape.backward(Tensor::scalar(3.0)));
  for (double g : x.grad()) EXPECT_EQ(g, 0.0);
}

TEST(Backward, NoRecordingWithoutScope) {
  Tensor x = Tensor::row({1, 2}, true);
  Tape tape;
  (void)cmerc::sum(x);
  EXPECT_EQ(tape.size(), 0u);
}

TEST(Backward, MlpMatchesFiniteDifferences) {
  Rng rng(5);
  Tensor x = oracle::random_tensor({3, 4}, rng);
  Tensor w1 = oracle::random_tensor({4, 5}, rng, true);
  Tensor b1 = oracle::random_tensor({1, 5}, rng, true);
  Tensor w2 = oracle::random_tensor({5, 3}, rng, true);
  auto loss = [&] {
    const Tensor h = cmerc::tanh(cmerc::add_row(cmerc::matmul(x, w1), b1));
    const Tensor p = cmerc::softmax_rows(cmerc::matmul(h, w2));
    return cmerc::mean(cmerc::log(cmerc::slice_cols(p, 0, 1)));
  };
  const double err = cmerc::finite_diff_check(loss, {{"w1", w1}, {"b1", b1}, {"w2", w2}});
  EXPECT_LT(err, kGradTol);
}

TEST(FiniteDiff, HalfSquaredNorm) {
  Rng rng(8);
  const Tensor x = oracle::random_tensor({3, 3}, rng, true);
  const double err = cmerc::finite_diff_check(
      [](const Tensor& t) { return cmerc::scale(cmerc::dot(t, t), 0.5); }, x);
  EXPECT_LT(err, 1e-8);
}

TEST(FiniteDiff, ConstantFunctionHasZeroError) {
  const Tensor x = Tensor::row({1, 2, 3}, true);
  const double err = cmerc::finite_diff_check([](const Tensor&) { return Tensor::scalar(4.0); }, x);
  EXPECT_EQ(err, 0.0);
}

TEST(FiniteDiff, RestoresParameters) {
  Rng rng(9);
  Tensor w = oracle::random_tensor({2, 3}, rng, true);
  const auto before = w.to_vector();
  cmerc::finite_diff_check([&] { return cmerc::sum(cmerc::exp(w)); }, {{"w", w}});
  EXPECT_EQ(w.to_vector(), before);
}

// Every differentiable op on five random shapes each.
struct OpCase {
  std::string name;
  std::function<Tensor(const Tensor&, const Tensor&)> f;
  bool square_b = false;  // b must be cols×cols
  bool row_b = false;     // b is 1×cols
  bool positive = false;
};

TEST(FiniteDiff, EveryOpOnRandomShapes) {
  const std::vector<OpCase> cases = {
      {"matmul", [](const Tensor& a, const Tensor& b) { return cmerc::matmul(a, b); }, true},
      {"matmul_nt", [](const Tensor& a, const Tensor& b) { return cmerc::matmul_nt(a, b); }},
      {"transpose", [](const Tensor& a, const Tensor&) { return cmerc::matmul(cmerc::transpose(a), a); }},
      {"add", [](const Tensor& a, const Tensor& b) { return cmerc::add(a, b); }},
      {"sub", [](const Tensor& a, const Tensor& b) { return cmerc::sub(a, b); }},
      {"mul", [](const Tensor& a, const Tensor& b) { return cmerc::mul(a, b); }},
      {"add_n", [](const Tensor& a, const Tensor& b) {
         const Tensor t[] = {a, b, a};
         return cmerc::add_n(t);
       }},
      {"add_row", [](const Tensor& a, const Tensor& b) { return cmerc::add_row(a, b); }, false, true},
      {"scale", [](const Tensor& a, const Tensor&) { return cmerc::scale(a, -1.7); }},
      {"scale_by", [](const Tensor& a, const Tensor& b) {
         return cmerc::scale_by(a, cmerc::slice_cols(cmerc::slice_rows(b, 0, 1), 0, 1));
       }},
      {"sigmoid", [](const Tensor& a, const Tensor&) { return cmerc::sigmoid(a); }},
      {"tanh", [](const Tensor& a, const Tensor&) { return cmerc::tanh(a); }},
      {"relu", [](const Tensor& a, const Tensor&) { return cmerc::relu(a); }},
      {"exp", [](const Tensor& a, const Tensor&) { return cmerc::exp(a); }},
      {"log", [](const Tensor& a, const Tensor&) { return cmerc::log(a); }, false, false, true},
      {"softmax", [](const Tensor& a, const Tensor&) { return cmerc::softmax_rows(a); }},
      {"concat_cols", [](const Tensor& a, const Tensor& b) {
         const Tensor t[] = {a, b};
         return cmerc::concat_cols(t);
       }},
      {"concat_rows", [](const Tensor& a, const Tensor& b) {
         const Tensor t[] = {a, b};
         return cmerc::concat_rows(t);
       }},
      {"slice", [](const Tensor& a, const Tensor&) {
         return cmerc::slice_rows(cmerc::slice_cols(a, a.cols() / 2, a.cols() - a.cols() / 2), 0, 1);
       }},
      {"mean_rows", [](const Tensor& a, const Tensor&) { return cmerc::mean_rows(a); }},
      {"mean", [](const Tensor& a, const Tensor&) { return cmerc::mean(a); }},
      {"dot", [](const Tensor& a, const Tensor& b) { return cmerc::dot(a, b); }},
      {"cosine", [](const Tensor& a, const Tensor& b) {
         return cmerc::cosine_similarity(cmerc::slice_rows(a, 0, 1), cmerc::slice_rows(b, 0, 1));
       }},
      {"pick", [](const Tensor& a, const Tensor&) { return cmerc::pick(a, a.rows() - 1, 0); }},
  };
  const std::vector<Shape> shapes = {{1, 1}, {1, 4}, {3, 2}, {2, 5}, {4, 3}};
  Rng rng(21);
  for (const auto& op : cases) {
    for (const auto& shape : shapes) {
      Tensor a = oracle::random_tensor(shape, rng, true);
      if (op.positive) {
        for (double& v : a.mutable_values()) v = std::abs(v) + 0.5;
      }
      const Shape b_shape = op.square_b ? Shape{shape.cols, shape.cols}
                            : op.row_b  ? Shape{1, shape.cols}
                                        : shape;
      Tensor b = oracle::random_tensor(b_shape, rng, true);
      // Weighted sum so every output coordinate gets a distinct sensitivity.
      const Shape out_shape = op.f(a, b).shape();
      const Tensor probe = oracle::random_tensor(out_shape, rng);
      auto loss = [&] { return cmerc::sum(cmerc::mul(op.f(a, b), probe)); };
      const auto report = cmerc::finite_diff_report(loss, {{"a", a}, {"b", b}});
      EXPECT_LT(report.max_rel_error, kGradTol)
          << op.name << " on " << shape.str() << " worst " << report.worst_param << "["
          << report.worst_index << "] analytic " << report.analytic << " numeric " << report.numeric;
    }
  }
}

TEST(FiniteDiff, LstmCell) {
  Rng rng(31);
  for (std::size_t hidden : {1u, 2u, 3u, 4u, 6u}) {
    Tensor gates = oracle::random_tensor({1, 4 * hidden}, rng, true, 2.0);
    Tensor cell = oracle::random_tensor({1, hidden}, rng, true);
    const Tensor probe = oracle::random_tensor({1, 2 * hidden}, rng);
    auto loss = [&] { return cmerc::sum(cmerc::mul(cmerc::lstm_cell(gates, cell), probe)); };
    EXPECT_LT(cmerc::finite_diff_check(loss, {{"gates", gates}, {"cell", cell}}), kGradTol);
  }
}

TEST(Ops, ShapeErrors) {
  const Tensor a = Tensor::zeros({2, 3});
  const Tensor b = Tensor::zeros({3, 2});
  EXPECT_THROW(cmerc::add(a, b), cmerc::ShapeError);
  EXPECT_THROW(cmerc::add_row(a, Tensor::zeros({1, 2})), cmerc::ShapeError);
  EXPECT_THROW(cmerc::dot(a, b), cmerc::ShapeError);
  EXPECT_THROW(cmerc::slice_cols(a, 2, 2), cmerc::ShapeError);
  EXPECT_THROW(Tensor({2, 2}, {1, 2, 3}), cmerc::ShapeError);
}

TEST(Ops, NonFiniteResultsRejected) {
  EXPECT_THROW(cmerc::exp(Tensor::row({1000})), cmerc::NumericError);
  EXPECT_THROW(cmerc::log(Tensor::row({0.0})), cmerc::Error);
  EXPECT_THROW(cmerc::softmax_rows(Tensor::row({NAN, 1.0})), cmerc::NumericError);
}

TEST(Xavier, SameSeedSameValues) {
  Rng a(17), b(17);
  EXPECT_EQ(cmerc::init_xavier({5, 7}, a).to_vector(), cmerc::init_xavier({5, 7}, b).to_vector());
}

TEST(Xavier, BoundsAndMean) {
  const double bound = std::sqrt(6.0 / 200.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const Tensor w = cmerc::init_xavier({100, 100}, rng);
    EXPECT_TRUE(w.requires_grad());
    double total = 0.0;
    for (double v : w.values()) {
      EXPECT_LE(std::abs(v), bound);
      total += v;
    }
    // Standard error of the mean is bound/sqrt(3e4) ~ 0.001.
    EXPECT_LT(std::abs(total / 10000.0), 0.01) << "seed " << seed;
  }
}

TEST(Rng, ForkDependsOnSeedOnly) {
  Rng a(99);
  Rng b(99);
  for (int i = 0; i < 5; ++i) b.next_u64();
  Rng fa = a.fork(3), fb = b.fork(3);
  EXPECT_EQ(fa.next_u64(), fb.next_u64());
  EXPECT_NE(a.fork(3).next_u64(), a.fork(4).next_u64());
}

TEST(Rng, UniformAndIndexRanges) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(rng.index(7), 7u);
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // After bias correction the first update is lr·g/(|g| + eps) ~ lr·sign(g).
  Tensor w = Tensor::row({1.0, -2.0}, true);
  w.mutable_grad()[0] = 3.0;
  w.mutable_grad()[1] = -0.5;
  cmerc::Adam adam({.learning_rate = 0.1});
  const cmerc::ParamGroup groups[] = {{{{"w", w}}, 1.0}};
  adam.step(groups);
  EXPECT_NEAR(w.at(0, 0), 0.9, 1e-7);
  EXPECT_NEAR(w.at(0, 1), -1.9, 1e-7);
  EXPECT_EQ(w.grad()[0], 0.0);
}

TEST(Determinism, IdenticalTrainingSteps) {
  auto train = [] {
    Rng rng(123);
    Tensor w = cmerc::init_xavier({4, 3}, rng);
    const Tensor x = oracle::random_tensor({6, 4}, rng);
    cmerc::Adam adam({.learning_rate = 0.05});
    for (int step = 0; step < 20; ++step) {
      Tape tape;
      Tape::Scope scope(tape);
      const Tensor loss = cmerc::mean(cmerc::exp(cmerc::matmul(x, w)));
      cmerc::backward(loss, tape);
      const cmerc::ParamGroup groups[] = {{{{"w", w}}, 1.0}};
      adam.step(groups);
    }
    return w.to_vector();
  };
  EXPECT_EQ(train(), train());
}

}  // namespace
