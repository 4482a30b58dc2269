#include "fewshot/head.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "fewshot/errors.h"
#include "fewshot/random.h"
#include "test_util.h"

namespace fewshot {
namespace {

std::vector<SentenceEmbedding> as_embeddings(
    const std::vector<std::vector<double>>& xs) {
  std::vector<SentenceEmbedding> out;
  for (size_t i = 0; i < xs.size(); ++i) {
    out.push_back({xs[i], "e" + std::to_string(i)});
  }
  return out;
}

double frobenius(const Matrix& m) { return l2_norm(m.data()); }

TEST(HeadTest, SeparatesOneDimensionalToy) {
  // Inputs are used raw so the sign carries the class.
  const auto xs = as_embeddings({{-2.0}, {-1.0}, {-0.5}, {0.5}, {1.0}, {2.0}});
  const std::vector<Label> ys = {"neg", "neg", "neg", "pos", "pos", "pos"};
  HeadConfig config;
  config.normalize_embeddings = false;
  const HeadParams head = train_head(xs, ys, config);
  for (size_t i = 0; i < xs.size(); ++i) {
    EXPECT_EQ(predict(head, xs[i].vector).label, ys[i]);
  }
}

TEST(HeadTest, ClassOrderIsFirstOccurrence) {
  const auto xs = as_embeddings({{1, 0}, {0, 1}, {1, 1}});
  const std::vector<Label> ys = {"b", "a", "c"};
  EXPECT_EQ(train_head(xs, ys, {}).class_order,
            (std::vector<Label>{"b", "a", "c"}));
}

TEST(HeadTest, RejectsBadInput) {
  HeadConfig zero;
  zero.iterations = 0;
  const auto xs = as_embeddings({{1, 0}, {0, 1}});
  const std::vector<Label> ys = {"a", "b"};
  EXPECT_THROW(train_head(xs, ys, zero), InvalidArgument);
  const std::vector<Label> one = {"a", "a"};
  EXPECT_THROW(train_head(xs, one, {}), InvalidArgument);
  const std::vector<Label> short_labels = {"a"};
  EXPECT_THROW(train_head(xs, short_labels, {}), InvalidArgument);
  const auto ragged = as_embeddings({{1, 0}, {1}});
  EXPECT_THROW(train_head(ragged, ys, {}), InvalidArgument);
  const auto zero_vec = as_embeddings({{1, 0}, {0, 0}});
  EXPECT_THROW(train_head(zero_vec, ys, {}), InvalidArgument);
}

TEST(HeadObjectiveTest, MatchesCentralDifferences) {
  Rng rng(21);
  const size_t classes = 3, dim = 8, n = 12;
  Matrix inputs(n, dim);
  for (double& v : inputs.data()) v = rng.uniform(-1, 1);
  std::vector<size_t> targets(n);
  for (auto& t : targets) t = rng.uniform_index(classes);
  Matrix w(classes, dim);
  for (double& v : w.data()) v = rng.uniform(-1, 1);
  std::vector<double> b(classes);
  for (double& v : b) v = rng.uniform(-1, 1);
  const double lambda = 0.3;

  const HeadObjective obj = head_objective(w, b, inputs, targets, lambda);
  std::vector<double> theta = w.data();
  theta.insert(theta.end(), b.begin(), b.end());
  std::vector<double> analytic = obj.grad_weights.data();
  analytic.insert(analytic.end(), obj.grad_bias.begin(), obj.grad_bias.end());

  const auto numeric = testing::central_differences(
      [&](const std::vector<double>& t) {
        Matrix wp(classes, dim);
        std::copy(t.begin(), t.begin() + classes * dim, wp.data().begin());
        const std::vector<double> bp(t.begin() + classes * dim, t.end());
        return head_objective(wp, bp, inputs, targets, lambda).loss;
      },
      theta, 1e-6);
  EXPECT_LE(testing::max_relative_error(analytic, numeric), 1e-5);
}

TEST(HeadObjectiveTest, ZeroWeightsGiveLogC) {
  Matrix inputs(4, 2);
  inputs(0, 0) = 1.0;
  const std::vector<size_t> targets = {0, 1, 2, 3};
  const HeadObjective obj =
      head_objective(Matrix(4, 2), std::vector<double>(4, 0.0), inputs,
                     targets, 1e-4);
  EXPECT_NEAR(obj.loss, std::log(4.0), 1e-15);
}

TEST(PredictTest, UniformLogitsTieToFirstClass) {
  const std::vector<Label> order = {"x", "y", "z"};
  const std::vector<double> logits = {0.5, 0.5, 0.5};
  const Prediction p = predict_from_logits(logits, order);
  EXPECT_EQ(p.label, "x");
  for (double q : p.probabilities) EXPECT_NEAR(q, 1.0 / 3, 1e-15);
}

TEST(PredictTest, ProbabilitiesFormSimplexAndShiftInvariant) {
  Rng rng(5);
  const std::vector<Label> order = {"a", "b", "c", "d"};
  for (int t = 0; t < 200; ++t) {
    std::vector<double> z(4);
    for (double& v : z) v = rng.uniform(-50, 50);
    const Prediction p = predict_from_logits(z, order);
    double sum = 0.0;
    for (double q : p.probabilities) {
      EXPECT_GE(q, 0.0);
      EXPECT_LE(q, 1.0);
      sum += q;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    std::vector<double> shifted = z;
    const double c = rng.uniform(-1000, 1000);
    for (double& v : shifted) v += c;
    const Prediction q = predict_from_logits(shifted, order);
    EXPECT_EQ(q.label, p.label);
    for (size_t k = 0; k < 4; ++k) {
      EXPECT_NEAR(q.probabilities[k], p.probabilities[k], 1e-9);
    }
  }
}

TEST(PredictTest, ExtremeLogitsStayFinite) {
  const std::vector<Label> order = {"a", "b"};
  const std::vector<double> z = {1e308, -1e308};
  const Prediction p = predict_from_logits(z, order);
  EXPECT_EQ(p.label, "a");
  EXPECT_EQ(p.probabilities[0], 1.0);
  EXPECT_EQ(p.probabilities[1], 0.0);
}

TEST(PredictTest, DimensionMismatchRejected) {
  const auto xs = as_embeddings({{1, 0}, {0, 1}});
  const std::vector<Label> ys = {"a", "b"};
  const HeadParams head = train_head(xs, ys, {});
  const std::vector<double> wrong = {1, 2, 3};
  EXPECT_THROW(predict(head, wrong), InvalidArgument);
}

TEST(HeadTest, StrongerRegularizationShrinksWeights) {
  Rng rng(9);
  std::vector<std::vector<double>> raw;
  std::vector<Label> ys;
  for (int i = 0; i < 30; ++i) {
    std::vector<double> x(6);
    for (double& v : x) v = rng.uniform(-1, 1);
    const int c = i % 3;
    x[c] += 2.0;
    raw.push_back(x);
    ys.push_back("c" + std::to_string(c));
  }
  const auto xs = as_embeddings(raw);
  double previous = 1e300;
  for (double lambda : {0.0, 1e-3, 1e-2, 1e-1, 1.0}) {
    HeadConfig config;
    config.l2_lambda = lambda;
    const double norm = frobenius(train_head(xs, ys, config).weights);
    EXPECT_LE(norm, previous + 1e-6) << "lambda " << lambda;
    previous = norm;
  }
}

TEST(HeadTest, Deterministic) {
  const auto xs = as_embeddings({{1, 0.2}, {0.1, 1}, {1, 1}, {-1, 0.3}});
  const std::vector<Label> ys = {"a", "b", "c", "a"};
  const HeadParams h1 = train_head(xs, ys, {});
  const HeadParams h2 = train_head(xs, ys, {});
  EXPECT_EQ(h1.weights, h2.weights);
  EXPECT_EQ(h1.bias, h2.bias);
}

}  // namespace
}  // namespace fewshot
