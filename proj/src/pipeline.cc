#include "fewshot/pipeline.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "fewshot/csv.h"
#include "fewshot/errors.h"

namespace fewshot {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Reads `key` into `field` if present; records the key as consumed.
template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& field,
                std::set<std::string>& seen) {
  seen.insert(key);
  if (j.contains(key)) field = j.at(key).get<T>();
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& seen,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!seen.count(key)) {
      throw InvalidArgument("config: unknown key '" + key + "' in " + where);
    }
  }
}

nlohmann::json to_json(const NormalizationOptions& o) {
  return {{"compose", o.compose},
          {"fold_alif", o.fold_alif},
          {"strip_punctuation", o.strip_punctuation},
          {"collapse_whitespace", o.collapse_whitespace},
          {"fold_hamza_carriers", o.fold_hamza_carriers},
          {"strip_diacritics", o.strip_diacritics}};
}

NormalizationOptions normalization_from_json(const nlohmann::json& j) {
  NormalizationOptions o;
  std::set<std::string> seen;
  read_field(j, "compose", o.compose, seen);
  read_field(j, "fold_alif", o.fold_alif, seen);
  read_field(j, "strip_punctuation", o.strip_punctuation, seen);
  read_field(j, "collapse_whitespace", o.collapse_whitespace, seen);
  read_field(j, "fold_hamza_carriers", o.fold_hamza_carriers, seen);
  read_field(j, "strip_diacritics", o.strip_diacritics, seen);
  reject_unknown(j, seen, "normalization");
  return o;
}

template <typename F>
auto run_stage(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const std::exception& e) {
    throw PipelineError(std::string(stage) + ": " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

RunConfig RunConfig::with_derived_seeds() const {
  RunConfig c = *this;
  c.contrastive.seed = global_seed + kPairSeedOffset;
  c.encoder.seed = global_seed + kEncoderSeedOffset;
  c.head.seed = global_seed + kHeadSeedOffset;
  return c;
}

void RunConfig::validate() const {
  encoder.validate();
  contrastive.validate();
  head.validate();
  if (shots_per_class == 0) {
    throw InvalidArgument("config: shots_per_class must be positive");
  }
}

nlohmann::json run_config_to_json(const RunConfig& c) {
  return {
      {"encoder",
       {{"ngram_min", c.encoder.ngram_min},
        {"ngram_max", c.encoder.ngram_max},
        {"buckets", c.encoder.buckets},
        {"dim", c.encoder.dim},
        {"seed", c.encoder.seed}}},
      {"contrastive",
       {{"epochs", c.contrastive.epochs},
        {"batch_size", c.contrastive.batch_size},
        {"pair_iterations", c.contrastive.pair_iterations},
        {"learning_rate", c.contrastive.learning_rate},
        {"adam_beta1", c.contrastive.adam_beta1},
        {"adam_beta2", c.contrastive.adam_beta2},
        {"adam_epsilon", c.contrastive.adam_epsilon},
        {"seed", c.contrastive.seed}}},
      {"head",
       {{"l2_lambda", c.head.l2_lambda},
        {"learning_rate", c.head.learning_rate},
        {"iterations", c.head.iterations},
        {"seed", c.head.seed},
        {"normalize_embeddings", c.head.normalize_embeddings}}},
      {"shots_per_class", c.shots_per_class},
      {"global_seed", c.global_seed},
      {"normalization", to_json(c.normalization)},
      {"balance_dialects", c.balance_dialects}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    std::set<std::string> seen;
    if (j.contains("encoder")) {
      const auto& e = j.at("encoder");
      std::set<std::string> s;
      read_field(e, "ngram_min", c.encoder.ngram_min, s);
      read_field(e, "ngram_max", c.encoder.ngram_max, s);
      read_field(e, "buckets", c.encoder.buckets, s);
      read_field(e, "dim", c.encoder.dim, s);
      read_field(e, "seed", c.encoder.seed, s);
      reject_unknown(e, s, "encoder");
    }
    if (j.contains("contrastive")) {
      const auto& e = j.at("contrastive");
      std::set<std::string> s;
      read_field(e, "epochs", c.contrastive.epochs, s);
      read_field(e, "batch_size", c.contrastive.batch_size, s);
      read_field(e, "pair_iterations", c.contrastive.pair_iterations, s);
      read_field(e, "learning_rate", c.contrastive.learning_rate, s);
      read_field(e, "adam_beta1", c.contrastive.adam_beta1, s);
      read_field(e, "adam_beta2", c.contrastive.adam_beta2, s);
      read_field(e, "adam_epsilon", c.contrastive.adam_epsilon, s);
      read_field(e, "seed", c.contrastive.seed, s);
      reject_unknown(e, s, "contrastive");
    }
    if (j.contains("head")) {
      const auto& e = j.at("head");
      std::set<std::string> s;
      read_field(e, "l2_lambda", c.head.l2_lambda, s);
      read_field(e, "learning_rate", c.head.learning_rate, s);
      read_field(e, "iterations", c.head.iterations, s);
      read_field(e, "seed", c.head.seed, s);
      read_field(e, "normalize_embeddings", c.head.normalize_embeddings, s);
      reject_unknown(e, s, "head");
    }
    seen.insert({"encoder", "contrastive", "head", "normalization"});
    read_field(j, "shots_per_class", c.shots_per_class, seen);
    read_field(j, "global_seed", c.global_seed, seen);
    read_field(j, "balance_dialects", c.balance_dialects, seen);
    if (j.contains("normalization")) {
      c.normalization = normalization_from_json(j.at("normalization"));
    }
    reject_unknown(j, seen, "run config");
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config file '" + path + "': " + e.what());
  }
  return run_config_from_json(j);
}

// ---------------------------------------------------------------------------
// Training

TrainResult train_pipeline(const Corpus& train, const RunConfig& base,
                           const EmbeddingProvider* external) {
  const RunConfig config = base.with_derived_seeds();
  config.validate();
  if (train.empty()) throw PipelineError("train: corpus is empty");
  train.require_labels("train_pipeline");
  const auto start = Clock::now();

  TrainResult result;
  ModelArtifact& artifact = result.artifact;
  artifact.normalization = config.normalization;
  artifact.dialect_set = train.dialect_set();

  const Corpus normalized = run_stage("normalize", [&] {
    std::vector<Review> kept;
    for (Review r : train.reviews()) {
      r.text = normalize_text(r.text, config.normalization);
      if (r.text.empty()) {
        std::string msg =
            "review '" + r.id + "' is empty after normalization; skipped";
        spdlog::warn(msg);
        result.warnings.push_back(std::move(msg));
        continue;
      }
      kept.push_back(std::move(r));
    }
    return Corpus(std::move(kept));
  });

  const ShotSet shots = run_stage("sample shots", [&] {
    ShotOptions options;
    options.balance_dialects = config.balance_dialects;
    return sample_shots(normalized, config.shots_per_class,
                        config.global_seed + kShotSeedOffset, options);
  });
  result.warnings.insert(result.warnings.end(), shots.warnings.begin(),
                         shots.warnings.end());

  const auto stage1_start = Clock::now();
  const bool finetune = external == nullptr || external->trainable();
  if (finetune) {
    FinetuneResult tuned = run_stage("stage 1 (contrastive fine-tuning)", [&] {
      return finetune_encoder(init_encoder(config.encoder), shots,
                              config.contrastive);
    });
    round_to_float(tuned.params.matrix.data());
    artifact.encoder = std::move(tuned.params);
    result.log = std::move(tuned.log);
    result.warnings.insert(result.warnings.end(), tuned.warnings.begin(),
                           tuned.warnings.end());
  }
  artifact.metadata.stage1_seconds = seconds_since(stage1_start);

  const auto stage2_start = Clock::now();
  artifact.head = run_stage("stage 2 (head training)", [&] {
    std::vector<SentenceEmbedding> embeddings;
    std::vector<Label> labels;
    for (const Review& r : shots.reviews) {
      embeddings.push_back(embed_review(artifact, r, external));
      labels.push_back(*r.sentiment);
    }
    return train_head(embeddings, labels, config.head);
  });
  round_to_float(artifact.head.weights.data());
  round_to_float(artifact.head.bias);
  artifact.metadata.stage2_seconds = seconds_since(stage2_start);

  artifact.metadata.global_seed = config.global_seed;
  artifact.metadata.shots_per_class = config.shots_per_class;
  artifact.metadata.training_shots = shots.size();
  for (const EpochLog& e : result.log) {
    artifact.metadata.epoch_losses.push_back(e.mean_loss);
  }
  artifact.metadata.total_seconds = seconds_since(start);
  spdlog::info("trained on {} shots in {:.2f}s (stage 1 {:.2f}s)",
               shots.size(), artifact.metadata.total_seconds,
               artifact.metadata.stage1_seconds);
  return result;
}

// ---------------------------------------------------------------------------
// Inference

SentenceEmbedding embed_review(const ModelArtifact& artifact,
                               const Review& normalized,
                               const EmbeddingProvider* external) {
  if (artifact.encoder) {
    return encode(*artifact.encoder, normalized.text, normalized.id);
  }
  if (external == nullptr) {
    throw InvalidArgument(
        "model has no encoder; a precomputed embedding table is required");
  }
  return external->embed(normalized);
}

std::vector<Prediction> predict_corpus(const ModelArtifact& artifact,
                                       const Corpus& corpus,
                                       const EmbeddingProvider* external) {
  std::vector<Review> normalized = corpus.reviews();
  std::vector<std::string> empty_ids;
  for (Review& r : normalized) {
    r.text = normalize_text(r.text, artifact.normalization);
    if (r.text.empty() && artifact.encoder) empty_ids.push_back(r.id);
  }
  if (!empty_ids.empty()) {
    std::string msg = "text is empty after normalization for id(s):";
    for (const auto& id : empty_ids) msg += " " + id;
    throw InvalidArgument(msg);
  }
  std::vector<Prediction> out;
  out.reserve(normalized.size());
  for (const Review& r : normalized) {
    out.push_back(
        predict(artifact.head, embed_review(artifact, r, external).vector));
  }
  return out;
}

void predict_file(const ModelArtifact& artifact, std::istream& in,
                  std::ostream& out, const EmbeddingProvider* external) {
  const Corpus corpus = load_corpus(in);
  const auto predictions = predict_corpus(artifact, corpus, external);
  const std::vector<std::string> header = {"ID", "Sentiment"};
  write_csv_record(out, header);
  for (size_t i = 0; i < corpus.size(); ++i) {
    const std::vector<std::string> row = {corpus[i].id, predictions[i].label};
    write_csv_record(out, row);
  }
}

EvalReport evaluate_pipeline(const ModelArtifact& artifact, const Corpus& test,
                             const EmbeddingProvider* external) {
  test.require_labels("evaluate_pipeline");
  const auto start = Clock::now();
  const auto predictions = predict_corpus(artifact, test, external);
  std::unordered_map<std::string, Label> by_id;
  for (size_t i = 0; i < test.size(); ++i) {
    by_id.emplace(test[i].id, predictions[i].label);
  }
  EvalReport report =
      dialect_breakdown(test, by_id, artifact.head.class_order);
  report.duration_seconds = seconds_since(start);
  return report;
}

// ---------------------------------------------------------------------------
// Sweeps

SweepResult sweep(const Corpus& train, const Corpus& test,
                  const SweepGrid& grid, const RunConfig& base,
                  const SweepOptions& options) {
  if (grid.shots.empty() || grid.epochs.empty() || grid.seeds == 0) {
    throw InvalidArgument("sweep: shots, epochs and seeds must be non-empty");
  }
  SweepResult result;
  for (size_t n : grid.shots) {
    for (int e : grid.epochs) {
      for (size_t k = 0; k < grid.seeds; ++k) {
        SweepRow row;
        row.shots = n;
        row.epochs = e;
        row.seed = base.global_seed + k;
        result.rows.push_back(row);
      }
    }
  }

  auto run_cell = [&](SweepRow& row) {
    const auto start = Clock::now();
    try {
      RunConfig config = base;
      config.shots_per_class = row.shots;
      config.contrastive.epochs = row.epochs;
      config.global_seed = row.seed;
      const TrainResult trained = train_pipeline(train, config);
      const EvalReport report = evaluate_pipeline(trained.artifact, test);
      row.macro_f1 = report.macro_f1;
      row.weighted_f1 = report.weighted_f1;
    } catch (const std::exception& e) {
      row.error = e.what();
      spdlog::error("sweep cell (n={}, E={}, seed={}) failed: {}", row.shots,
                    row.epochs, row.seed, e.what());
    }
    row.duration_seconds = seconds_since(start);
  };

  if (options.parallel) {
    std::vector<std::future<void>> jobs;
    for (SweepRow& row : result.rows) {
      jobs.push_back(std::async(std::launch::async, run_cell, std::ref(row)));
    }
    for (auto& job : jobs) job.get();
  } else {
    for (SweepRow& row : result.rows) run_cell(row);
  }
  return result;
}

nlohmann::json sweep_to_json(const SweepResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const SweepRow& r : result.rows) {
    nlohmann::json j = {{"shots", r.shots},
                        {"epochs", r.epochs},
                        {"seed", r.seed},
                        {"macro_f1", r.macro_f1},
                        {"weighted_f1", r.weighted_f1},
                        {"duration_seconds", r.duration_seconds}};
    if (r.error) j["error"] = *r.error;
    rows.push_back(std::move(j));
  }
  return {{"rows", rows}};
}

void print_sweep_table(std::ostream& out, const SweepResult& result) {
  struct Cell {
    double f1 = 0.0;
    double seconds = 0.0;
    size_t runs = 0;
    size_t failed = 0;
  };
  std::vector<std::pair<std::pair<size_t, int>, Cell>> cells;
  for (const SweepRow& r : result.rows) {
    const auto key = std::make_pair(r.shots, r.epochs);
    auto it = std::find_if(cells.begin(), cells.end(),
                           [&](const auto& c) { return c.first == key; });
    if (it == cells.end()) {
      cells.push_back({key, Cell{}});
      it = cells.end() - 1;
    }
    Cell& c = it->second;
    c.seconds += r.duration_seconds;
    if (r.error) {
      ++c.failed;
    } else {
      c.f1 += r.macro_f1;
      ++c.runs;
    }
  }

  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << "Samples Number | Epoch | F1 % | Duration in h:m:s\n";
  out << "---|---|---|---\n";
  out << std::fixed << std::setprecision(2);
  for (const auto& [key, c] : cells) {
    const size_t seeds = c.runs + c.failed;
    out << key.first << " | " << key.second << " | ";
    if (c.runs > 0) {
      out << c.f1 / static_cast<double>(c.runs) * 100.0;
    } else {
      out << "failed";
    }
    out << " | " << format_hms(c.seconds / static_cast<double>(seeds)) << '\n';
  }
  out.flags(old_flags);
  out.precision(old_precision);
}

}  // namespace fewshot
