#ifndef FEWSHOT_ADAM_H_
#define FEWSHOT_ADAM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "fewshot/matrix.h"

namespace fewshot {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // Throws InvalidArgument.
  void validate() const;
};

// Bias-corrected Adam over a flat parameter vector.
class Adam {
 public:
  Adam(size_t n_params, const AdamConfig& config);

  void step(std::span<double> params, std::span<const double> grad);

  uint64_t steps() const { return t_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  uint64_t t_ = 0;
};

// Gradient of a matrix parameter that is zero outside a few rows. `rows` is
// sorted ascending; `values` holds rows.size() x cols entries.
struct RowSparseGradient {
  size_t cols = 0;
  std::vector<uint64_t> rows;
  std::vector<double> values;

  std::span<const double> row(size_t k) const {
    return {values.data() + k * cols, cols};
  }
  Matrix to_dense(size_t n_rows) const;
};

// Moments shaped like the parameter matrix plus the step counter.
struct OptimizerState {
  Matrix m;
  Matrix v;
  uint64_t t = 0;
};

// Adam for a matrix whose gradients are row-sparse. Produces exactly the same
// iterates as dense Adam: rows that have never received a gradient have zero
// moments and therefore a zero update, so only rows touched at least once are
// visited on each step.
class RowSparseAdam {
 public:
  RowSparseAdam(size_t rows, size_t cols, const AdamConfig& config);

  void step(Matrix& params, const RowSparseGradient& grad);

  const OptimizerState& state() const { return state_; }
  size_t active_rows() const { return active_.size(); }

 private:
  AdamConfig config_;
  OptimizerState state_;
  std::vector<uint8_t> is_active_;
  std::vector<uint64_t> active_;
};

}  // namespace fewshot

#endif  // FEWSHOT_ADAM_H_
