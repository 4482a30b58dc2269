#ifndef FEWSHOT_PIPELINE_H_
#define FEWSHOT_PIPELINE_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fewshot/contrastive.h"
#include "fewshot/errors.h"
#include "fewshot/corpus.h"
#include "fewshot/encoder.h"
#include "fewshot/head.h"
#include "fewshot/metrics.h"
#include "fewshot/normalize.h"

namespace fewshot {

// Offsets added to RunConfig::global_seed to seed each component.
inline constexpr uint64_t kSplitSeedOffset = 1;
inline constexpr uint64_t kShotSeedOffset = 2;
inline constexpr uint64_t kPairSeedOffset = 3;
inline constexpr uint64_t kEncoderSeedOffset = 4;
inline constexpr uint64_t kHeadSeedOffset = 5;

struct RunConfig {
  EncoderConfig encoder;
  ContrastiveConfig contrastive;
  HeadConfig head;
  size_t shots_per_class = 64;
  uint64_t global_seed = 42;
  NormalizationOptions normalization;
  bool balance_dialects = false;

  // Copy with every component seed derived from global_seed.
  RunConfig with_derived_seeds() const;
  void validate() const;
};

// Field-for-field JSON mapping. Missing keys keep their defaults; unknown
// keys are rejected.
nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& json);
RunConfig load_run_config_file(const std::string& path);

struct TrainingMetadata {
  uint64_t global_seed = 0;
  size_t shots_per_class = 0;
  size_t training_shots = 0;
  std::vector<double> epoch_losses;
  // Wall clock, seconds.
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;
  double total_seconds = 0.0;

  bool operator==(const TrainingMetadata&) const = default;
};

inline constexpr uint32_t kModelFormatVersion = 1;

struct ModelArtifact {
  uint32_t format_version = kModelFormatVersion;
  // Absent for head-only models trained on precomputed embeddings.
  std::optional<EncoderParams> encoder;
  HeadParams head;
  std::vector<std::string> dialect_set;
  NormalizationOptions normalization;
  TrainingMetadata metadata;
};

struct TrainResult {
  ModelArtifact artifact;
  std::vector<EpochLog> log;
  std::vector<std::string> warnings;
};

// normalize -> sample shots -> stage 1 (fine-tune encoder) -> embed shots ->
// stage 2 (train head). With a non-trainable `external` provider stage 1 is
// skipped and the artifact carries no encoder. Component failures are
// rethrown as PipelineError tagged with the stage.
TrainResult train_pipeline(const Corpus& train, const RunConfig& config,
                           const EmbeddingProvider* external = nullptr);

class PipelineError : public Error {
 public:
  using Error::Error;
};

// Embeds one normalized review with the artifact's encoder, or with
// `external` for head-only models.
SentenceEmbedding embed_review(const ModelArtifact& artifact,
                               const Review& normalized,
                               const EmbeddingProvider* external = nullptr);

// Normalizes with the artifact's stored options and classifies each review.
// Throws InvalidArgument listing every id whose text normalizes to empty.
std::vector<Prediction> predict_corpus(
    const ModelArtifact& artifact, const Corpus& corpus,
    const EmbeddingProvider* external = nullptr);

// Writes "ID,Sentiment" rows in input order.
void predict_file(const ModelArtifact& artifact, std::istream& in,
                  std::ostream& out,
                  const EmbeddingProvider* external = nullptr);

EvalReport evaluate_pipeline(const ModelArtifact& artifact,
                             const Corpus& test,
                             const EmbeddingProvider* external = nullptr);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepGrid {
  std::vector<size_t> shots;
  std::vector<int> epochs;
  size_t seeds = 1;
};

struct SweepRow {
  size_t shots = 0;
  int epochs = 0;
  uint64_t seed = 0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  double duration_seconds = 0.0;
  std::optional<std::string> error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

struct SweepOptions {
  bool parallel = false;
};

// One train + evaluate per (shots, epochs, seed) cell; seed k of a cell is
// global_seed + k. Rows come out shots-major, then epochs, then seed. A
// failing cell records its error and the sweep continues.
SweepResult sweep(const Corpus& train, const Corpus& test,
                  const SweepGrid& grid, const RunConfig& base,
                  const SweepOptions& options = {});

nlohmann::json sweep_to_json(const SweepResult& result);

// One line per (shots, epochs) cell, averaged over seeds, with columns
// Samples Number | Epoch | F1 % | Duration in h:m:s.
void print_sweep_table(std::ostream& out, const SweepResult& result);

}  // namespace fewshot

#endif  // FEWSHOT_PIPELINE_H_
