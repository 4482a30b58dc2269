#ifndef FEWSHOT_HEAD_H_
#define FEWSHOT_HEAD_H_

#include <cstdint>
#include <span>
#include <vector>

#include "fewshot/corpus.h"
#include "fewshot/encoder.h"
#include "fewshot/matrix.h"

namespace fewshot {

struct HeadConfig {
  double l2_lambda = 1e-4;
  double learning_rate = 0.1;
  int iterations = 300;
  uint64_t seed = 0;  // unused by the zero-initialized solver; kept for runs
  bool normalize_embeddings = true;

  void validate() const;
};

// Multinomial logistic regression: logits = weights * x + bias.
struct HeadParams {
  Matrix weights;  // classes x dim
  std::vector<double> bias;
  std::vector<Label> class_order;
  bool normalize_inputs = true;
  double final_loss = 0.0;

  size_t classes() const { return class_order.size(); }
  size_t dim() const { return weights.cols(); }
};

struct Prediction {
  Label label;
  std::vector<double> probabilities;
};

// Objective value and gradient of
//   mean_i -log softmax(W x_i + b)[y_i] + (lambda / 2) * ||W||^2
// at the given weights. Inputs are used as given (no normalization).
struct HeadObjective {
  double loss = 0.0;
  Matrix grad_weights;
  std::vector<double> grad_bias;
};
HeadObjective head_objective(const Matrix& weights,
                             std::span<const double> bias,
                             const Matrix& inputs,
                             std::span<const size_t> targets, double lambda);

// Stage 2. Class order is the first-occurrence order of `labels`. Full-batch
// Adam from zero initialization for config.iterations steps. Throws
// InvalidArgument for a single class, a size or dimension mismatch, or a
// zero vector when normalization is on.
HeadParams train_head(std::span<const SentenceEmbedding> embeddings,
                      std::span<const Label> labels, const HeadConfig& config);

// Softmax over the logits (max-subtracted); ties go to the smallest class
// index.
Prediction predict_from_logits(std::span<const double> logits,
                               std::span<const Label> class_order);

// Applies the head's input normalization, then predict_from_logits.
Prediction predict(const HeadParams& head, std::span<const double> embedding);

}  // namespace fewshot

#endif  // FEWSHOT_HEAD_H_
