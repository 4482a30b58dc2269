#include "fewshot/adam.h"

#include <cmath>

#include "fewshot/errors.h"

namespace fewshot {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) {
    throw InvalidArgument("adam: learning rate must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw InvalidArgument("adam: betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw InvalidArgument("adam: epsilon must be positive");
}

Adam::Adam(size_t n_params, const AdamConfig& config)
    : config_(config), m_(n_params, 0.0), v_(n_params, 0.0) {
  config_.validate();
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw InvalidArgument("adam: parameter/gradient size mismatch");
  }
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    params[i] -= config_.learning_rate * (m_[i] / c1) /
                 (std::sqrt(v_[i] / c2) + config_.epsilon);
  }
}

Matrix RowSparseGradient::to_dense(size_t n_rows) const {
  Matrix dense(n_rows, cols);
  for (size_t k = 0; k < rows.size(); ++k) {
    const auto src = row(k);
    auto dst = dense.row(rows[k]);
    for (size_t c = 0; c < cols; ++c) dst[c] = src[c];
  }
  return dense;
}

RowSparseAdam::RowSparseAdam(size_t rows, size_t cols,
                             const AdamConfig& config)
    : config_(config), is_active_(rows, 0) {
  config_.validate();
  state_.m = Matrix(rows, cols);
  state_.v = Matrix(rows, cols);
}

void RowSparseAdam::step(Matrix& params, const RowSparseGradient& grad) {
  if (params.rows() != state_.m.rows() || params.cols() != state_.m.cols() ||
      grad.cols != params.cols()) {
    throw InvalidArgument("adam: parameter/gradient shape mismatch");
  }
  for (uint64_t r : grad.rows) {
    if (!is_active_[r]) {
      is_active_[r] = 1;
      active_.push_back(r);
    }
  }

  ++state_.t;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state_.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state_.t));
  const double lr = config_.learning_rate;
  const size_t cols = params.cols();

  // Rows with a gradient this step.
  for (size_t k = 0; k < grad.rows.size(); ++k) {
    const uint64_t r = grad.rows[k];
    const auto g = grad.row(k);
    auto m = state_.m.row(r);
    auto v = state_.v.row(r);
    auto p = params.row(r);
    for (size_t c = 0; c < cols; ++c) {
      m[c] = b1 * m[c] + (1.0 - b1) * g[c];
      v[c] = b2 * v[c] + (1.0 - b2) * g[c] * g[c];
      p[c] -= lr * (m[c] / c1) / (std::sqrt(v[c] / c2) + config_.epsilon);
    }
    is_active_[r] = 2;  // mark as done for this step
  }
  // Previously touched rows with a zero gradient this step.
  for (uint64_t r : active_) {
    if (is_active_[r] == 2) {
      is_active_[r] = 1;
      continue;
    }
    auto m = state_.m.row(r);
    auto v = state_.v.row(r);
    auto p = params.row(r);
    for (size_t c = 0; c < cols; ++c) {
      m[c] *= b1;
      v[c] *= b2;
      p[c] -= lr * (m[c] / c1) / (std::sqrt(v[c] / c2) + config_.epsilon);
    }
  }
}

}  // namespace fewshot
