#include "fewshot/adam.h"

#include <gtest/gtest.h>

#include <cmath>

#include "fewshot/errors.h"
#include "fewshot/random.h"

namespace fewshot {
namespace {

TEST(AdamTest, FirstStepMovesByLearningRate) {
  // With bias correction the first update is lr * g / (|g| + eps).
  Adam adam(2, {0.1, 0.9, 0.999, 1e-8});
  std::vector<double> p = {1.0, -1.0};
  const std::vector<double> g = {3.0, -0.5};
  adam.step(p, g);
  EXPECT_NEAR(p[0], 0.9, 1e-8);
  EXPECT_NEAR(p[1], -0.9, 1e-7);
  EXPECT_EQ(adam.steps(), 1u);
}

TEST(AdamTest, MinimizesQuadratic) {
  Adam adam(3, {0.05, 0.9, 0.999, 1e-8});
  std::vector<double> p = {2.0, -3.0, 0.5};
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> g(3);
    for (int i = 0; i < 3; ++i) g[i] = 2.0 * (p[i] - i);
    adam.step(p, g);
  }
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], i, 1e-3);
}

TEST(AdamTest, RejectsBadConfig) {
  EXPECT_THROW(Adam(1, {0.0, 0.9, 0.999, 1e-8}), InvalidArgument);
  EXPECT_THROW(Adam(1, {0.1, 1.0, 0.999, 1e-8}), InvalidArgument);
}

// The row-sparse optimizer must reproduce dense Adam bit for bit, including
// the drift of rows whose gradient is zero on a given step.
TEST(RowSparseAdamTest, MatchesDenseAdamExactly) {
  const size_t rows = 12, cols = 3;
  const AdamConfig config{0.05, 0.9, 0.999, 1e-8};
  Rng rng(8);
  Matrix sparse_params(rows, cols);
  for (double& v : sparse_params.data()) v = rng.uniform(-1, 1);
  std::vector<double> dense_params = sparse_params.data();

  RowSparseAdam sparse(rows, cols, config);
  Adam dense(rows * cols, config);
  for (int step = 0; step < 50; ++step) {
    RowSparseGradient g;
    g.cols = cols;
    for (uint64_t r = 0; r < rows; ++r) {
      if (rng.uniform01() < 0.3) {
        g.rows.push_back(r);
        for (size_t c = 0; c < cols; ++c) g.values.push_back(rng.uniform(-1, 1));
      }
    }
    sparse.step(sparse_params, g);
    dense.step(dense_params, g.to_dense(rows).data());
    ASSERT_EQ(sparse_params.data(), dense_params) << "step " << step;
  }
  EXPECT_EQ(sparse.state().m.data(), dense.first_moment());
  EXPECT_EQ(sparse.state().v.data(), dense.second_moment());
}

}  // namespace
}  // namespace fewshot
