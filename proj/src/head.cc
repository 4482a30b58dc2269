#include "fewshot/head.h"

#include <algorithm>
#include <cmath>

#include "fewshot/adam.h"
#include "fewshot/errors.h"

namespace fewshot {
namespace {

std::vector<double> normalized(std::span<const double> x) {
  const double n = l2_norm(x);
  if (n == 0.0) throw InvalidArgument("head: cannot L2-normalize a zero vector");
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v /= n;
  return out;
}

void logits_into(const Matrix& w, std::span<const double> b,
                 std::span<const double> x, std::vector<double>& z) {
  z.resize(w.rows());
  for (size_t c = 0; c < w.rows(); ++c) z[c] = dot(w.row(c), x) + b[c];
}

// In-place softmax with max subtraction; returns log of the normalizer
// relative to the max.
double softmax_inplace(std::vector<double>& z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return std::log(sum) + zmax;
}

}  // namespace

void HeadConfig::validate() const {
  if (!(l2_lambda >= 0.0)) throw InvalidArgument("head: l2_lambda must be >= 0");
  if (!(learning_rate > 0.0)) {
    throw InvalidArgument("head: learning_rate must be positive");
  }
  if (iterations < 1) throw InvalidArgument("head: iterations must be >= 1");
}

HeadObjective head_objective(const Matrix& weights,
                             std::span<const double> bias,
                             const Matrix& inputs,
                             std::span<const size_t> targets, double lambda) {
  const size_t n = inputs.rows();
  const size_t classes = weights.rows();
  const size_t dim = weights.cols();
  HeadObjective out;
  out.grad_weights = Matrix(classes, dim);
  out.grad_bias.assign(classes, 0.0);

  std::vector<double> z;
  double nll = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const auto x = inputs.row(i);
    logits_into(weights, bias, x, z);
    const double logit_target = z[targets[i]];
    const double log_norm = softmax_inplace(z);
    nll += log_norm - logit_target;
    // d(-log p_y)/dz = p - onehot(y)
    z[targets[i]] -= 1.0;
    for (size_t c = 0; c < classes; ++c) {
      auto g = out.grad_weights.row(c);
      for (size_t k = 0; k < dim; ++k) g[k] += z[c] * x[k];
      out.grad_bias[c] += z[c];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  double sq = 0.0;
  for (double w : weights.data()) sq += w * w;
  out.loss = nll * inv_n + 0.5 * lambda * sq;
  for (size_t j = 0; j < out.grad_weights.size(); ++j) {
    out.grad_weights.data()[j] =
        out.grad_weights.data()[j] * inv_n + lambda * weights.data()[j];
  }
  for (double& g : out.grad_bias) g *= inv_n;
  return out;
}

HeadParams train_head(std::span<const SentenceEmbedding> embeddings,
                      std::span<const Label> labels, const HeadConfig& config) {
  config.validate();
  if (embeddings.size() != labels.size()) {
    throw InvalidArgument("head: embeddings and labels differ in length");
  }
  if (embeddings.empty()) throw InvalidArgument("head: no training examples");

  HeadParams head;
  head.normalize_inputs = config.normalize_embeddings;
  std::vector<size_t> targets;
  for (const Label& l : labels) {
    auto it = std::find(head.class_order.begin(), head.class_order.end(), l);
    targets.push_back(static_cast<size_t>(it - head.class_order.begin()));
    if (it == head.class_order.end()) head.class_order.push_back(l);
  }
  if (head.class_order.size() < 2) {
    throw InvalidArgument("head: training needs at least two distinct labels");
  }

  const size_t dim = embeddings[0].vector.size();
  if (dim == 0) throw InvalidArgument("head: embeddings are empty");
  Matrix inputs(embeddings.size(), dim);
  for (size_t i = 0; i < embeddings.size(); ++i) {
    const auto& e = embeddings[i].vector;
    if (e.size() != dim) {
      throw InvalidArgument("head: embedding '" + embeddings[i].source_id +
                            "' has dimension " + std::to_string(e.size()) +
                            ", expected " + std::to_string(dim));
    }
    const std::vector<double> x =
        config.normalize_embeddings ? normalized(e) : e;
    std::copy(x.begin(), x.end(), inputs.row(i).begin());
  }

  const size_t classes = head.class_order.size();
  // Weights then bias in one flat vector so one Adam instance drives both.
  std::vector<double> theta(classes * dim + classes, 0.0);
  Adam optimizer(theta.size(), {config.learning_rate, 0.9, 0.999, 1e-8});
  Matrix weights(classes, dim);
  std::vector<double> grad(theta.size());
  auto unpack = [&] {
    std::copy(theta.begin(), theta.begin() + classes * dim,
              weights.data().begin());
  };
  const std::span<const double> bias(theta.data() + classes * dim, classes);

  for (int it = 0; it < config.iterations; ++it) {
    unpack();
    const HeadObjective obj =
        head_objective(weights, bias, inputs, targets, config.l2_lambda);
    std::copy(obj.grad_weights.data().begin(), obj.grad_weights.data().end(),
              grad.begin());
    std::copy(obj.grad_bias.begin(), obj.grad_bias.end(),
              grad.begin() + classes * dim);
    optimizer.step(theta, grad);
  }
  unpack();
  head.weights = weights;
  head.bias.assign(bias.begin(), bias.end());
  head.final_loss =
      head_objective(weights, bias, inputs, targets, config.l2_lambda).loss;
  return head;
}

Prediction predict_from_logits(std::span<const double> logits,
                               std::span<const Label> class_order) {
  Prediction p;
  std::vector<double> z(logits.begin(), logits.end());
  size_t best = 0;
  for (size_t c = 1; c < z.size(); ++c) {
    if (z[c] > z[best]) best = c;
  }
  softmax_inplace(z);
  p.probabilities = std::move(z);
  p.label = class_order[best];
  return p;
}

Prediction predict(const HeadParams& head, std::span<const double> embedding) {
  if (embedding.size() != head.dim()) {
    throw InvalidArgument("predict: embedding dimension " +
                          std::to_string(embedding.size()) +
                          " does not match head dimension " +
                          std::to_string(head.dim()));
  }
  std::vector<double> x = head.normalize_inputs
                              ? normalized(embedding)
                              : std::vector<double>(embedding.begin(),
                                                    embedding.end());
  std::vector<double> z;
  logits_into(head.weights, head.bias, x, z);
  return predict_from_logits(z, head.class_order);
}

}  // namespace fewshot
