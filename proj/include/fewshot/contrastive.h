#ifndef FEWSHOT_CONTRASTIVE_H_
#define FEWSHOT_CONTRASTIVE_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fewshot/adam.h"
#include "fewshot/corpus.h"
#include "fewshot/encoder.h"

namespace fewshot {

// Indices into a ShotSet. target is 1.0 for same-label pairs, else 0.0.
struct Pair {
  size_t left = 0;
  size_t right = 0;
  double target = 0.0;

  bool operator==(const Pair&) const = default;
};

struct ContrastiveConfig {
  int epochs = 3;
  int batch_size = 16;
  int pair_iterations = 20;
  double learning_rate = 0.05;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  uint64_t seed = 0;

  void validate() const;
  AdamConfig adam() const {
    return {learning_rate, adam_beta1, adam_beta2, adam_epsilon};
  }
};

struct PairSet {
  std::vector<Pair> pairs;
  std::vector<std::string> warnings;
};

// For each of `iterations` rounds and each anchor i, emits (i, j, 1) with j
// drawn uniformly from the other members of i's class and (i, k, 0) with k
// drawn uniformly from the other classes; the whole sequence is then
// shuffled. Anchors of single-member classes get no positive pair (warning).
// Throws InvalidArgument when fewer than two classes are present.
PairSet generate_pairs(const ShotSet& shots, int iterations, uint64_t seed);

// Throws NumericError on a zero-norm input.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

// (cos(u, v) - target)^2
double pair_loss(std::span<const double> u, std::span<const double> v,
                 double target);

// Mean of pair_loss over the batch.
double batch_loss(std::span<const Pair> batch,
                  std::span<const FeatureBag> features,
                  const EncoderParams& params);

struct BatchGradient {
  double loss = 0.0;  // mean pair loss at the current parameters
  RowSparseGradient grad;
};

// Analytic gradient of batch_loss with respect to params.matrix.
// `features[i]` belongs to shot i; `ids[i]` names it in errors (a zero-norm
// embedding raises NumericError carrying the offending id).
BatchGradient loss_gradient(std::span<const Pair> batch,
                            std::span<const FeatureBag> features,
                            std::span<const std::string> ids,
                            const EncoderParams& params);

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  size_t pairs = 0;
  double seconds = 0.0;
};

struct FinetuneResult {
  EncoderParams params;
  std::vector<EpochLog> log;
  std::vector<std::string> warnings;
};

// Stage 1. Pairs are generated once from `shots` (whose texts must already be
// normalized), re-shuffled every epoch, and consumed in batches of
// batch_size (last short batch included) with one Adam step per batch.
FinetuneResult finetune_encoder(EncoderParams params, const ShotSet& shots,
                                const ContrastiveConfig& config);

// One JSON object per line: {"epoch", "mean_loss", "pairs", "seconds"}.
void write_training_log(std::ostream& out, std::span<const EpochLog> log);

}  // namespace fewshot

#endif  // FEWSHOT_CONTRASTIVE_H_
