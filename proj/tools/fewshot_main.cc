// Command-line front end: corpus preparation, training, inference,
// evaluation and grid sweeps.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI/CLI.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "fewshot/corpus.h"
#include "fewshot/encoder.h"
#include "fewshot/metrics.h"
#include "fewshot/model_io.h"
#include "fewshot/normalize.h"
#include "fewshot/pipeline.h"

namespace fs = std::filesystem;

namespace fewshot {
namespace {

struct GlobalOptions {
  std::optional<uint64_t> seed;
  std::string config_path;
  std::string log_level;
};

void setup_logging(const std::string& level) {
  // Diagnostics go to stderr so stdout stays clean for tables.
  auto logger = spdlog::stderr_color_mt("fewshot");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (!level.empty()) {
    spdlog::cfg::helpers::load_levels(level);
  } else if (const char* env = std::getenv("SFCM_LOG")) {
    spdlog::cfg::helpers::load_levels(env);
  }
}

RunConfig base_config(const GlobalOptions& g) {
  RunConfig config =
      g.config_path.empty() ? RunConfig{} : load_run_config_file(g.config_path);
  if (g.seed) config.global_seed = *g.seed;
  return config;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  return out;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
}

std::unique_ptr<PrecomputedEmbeddings> maybe_embeddings(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_unique<PrecomputedEmbeddings>(
      load_precomputed_provider_file(path));
}

// Options shared by the training-style subcommands; each overrides the
// corresponding config field only when given.
struct TrainingFlags {
  std::optional<size_t> per_class;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<int> pair_iterations;
  std::optional<double> lr;

  void add_to(CLI::App* app, bool with_epochs = true) {
    app->add_option("--per-class", per_class, "Shots sampled per class");
    if (with_epochs) app->add_option("--epochs", epochs, "Stage-1 epochs");
    app->add_option("--batch-size", batch_size, "Stage-1 pairs per batch");
    app->add_option("--pair-iterations", pair_iterations,
                    "Rounds of pair generation per shot");
    app->add_option("--lr", lr, "Stage-1 learning rate");
  }

  void apply(RunConfig& c) const {
    if (per_class) c.shots_per_class = *per_class;
    if (epochs) c.contrastive.epochs = *epochs;
    if (batch_size) c.contrastive.batch_size = *batch_size;
    if (pair_iterations) c.contrastive.pair_iterations = *pair_iterations;
    if (lr) c.contrastive.learning_rate = *lr;
  }
};

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Few-shot sentiment classification with contrastive fine-tuning"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Global seed");
  app.add_option("--config", g.config_path, "Run configuration JSON file")
      ->check(CLI::ExistingFile);
  app.add_option("--log", g.log_level,
                 "Log level (trace, debug, info, warn, error); defaults to "
                 "$SFCM_LOG");

  // normalize
  std::string in, out;
  auto* normalize_cmd = app.add_subcommand("normalize", "Normalize review texts");
  NormalizationOptions norm;
  normalize_cmd->add_option("--in", in)->required();
  normalize_cmd->add_option("--out", out)->required();
  normalize_cmd->add_flag("--fold-hamza", norm.fold_hamza_carriers,
                          "Fold hamza carriers and drop lone hamza");
  normalize_cmd->add_flag("--strip-diacritics", norm.strip_diacritics);

  // split
  double ratio = 0.8;
  auto* split_cmd =
      app.add_subcommand("split", "Stratified train/test split into a directory");
  split_cmd->add_option("--in", in)->required();
  split_cmd->add_option("--out", out, "Directory for train.csv and test.csv")
      ->required();
  split_cmd->add_option("--ratio", ratio, "Train fraction")->capture_default_str();

  // sample-shots
  size_t per_class = 8;
  bool balance = false;
  auto* shots_cmd = app.add_subcommand("sample-shots", "Sample n reviews per class");
  shots_cmd->add_option("--in", in)->required();
  shots_cmd->add_option("--out", out)->required();
  shots_cmd->add_option("--per-class", per_class)->capture_default_str();
  shots_cmd->add_flag("--balance-dialects", balance);

  // synth
  SyntheticSpec spec;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic labeled corpus");
  synth_cmd->add_option("--out", out)->required();
  synth_cmd->add_option("--per-class", spec.per_class)->capture_default_str();
  synth_cmd->add_option("--classes", spec.classes)->capture_default_str();

  // train
  std::string model, embeddings, log_out;
  TrainingFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a labeled CSV");
  train_cmd->add_option("--in", in)->required();
  train_cmd->add_option("--out", out, "Model container path")->required();
  train_cmd->add_option("--embeddings", embeddings,
                        "Precomputed embedding table (head-only model)");
  train_cmd->add_option("--log-out", log_out, "Stage-1 training log (JSONL)");
  train_flags.add_to(train_cmd);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Write ID,Sentiment predictions");
  predict_cmd->add_option("--model", model)->required();
  predict_cmd->add_option("--in", in)->required();
  predict_cmd->add_option("--out", out)->required();
  predict_cmd->add_option("--embeddings", embeddings);

  // evaluate
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Score a model on a labeled CSV");
  evaluate_cmd->add_option("--model", model)->required();
  evaluate_cmd->add_option("--in", in)->required();
  evaluate_cmd->add_option("--out", out, "JSON report path");
  evaluate_cmd->add_option("--embeddings", embeddings);

  // sweep
  std::string test_path;
  std::vector<size_t> grid_shots = {8, 16, 32, 64};
  std::vector<int> grid_epochs = {1, 3, 5};
  size_t grid_seeds = 1;
  bool parallel = false;
  TrainingFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Train and evaluate over a shots x epochs grid");
  sweep_cmd->add_option("--in", in, "Labeled training CSV")->required();
  sweep_cmd->add_option("--test", test_path,
                        "Labeled test CSV; without it --in is split by --ratio");
  sweep_cmd->add_option("--ratio", ratio)->capture_default_str();
  sweep_cmd->add_option("--out", out, "JSON results path");
  sweep_cmd->add_option("--shots", grid_shots)->capture_default_str();
  sweep_cmd->add_option("--epoch-grid", grid_epochs)->capture_default_str();
  sweep_cmd->add_option("--seeds", grid_seeds, "Seeds per cell")
      ->capture_default_str();
  sweep_cmd->add_flag("--parallel", parallel, "Run cells concurrently");
  sweep_flags.add_to(sweep_cmd, /*with_epochs=*/false);

  // embed
  auto* embed_cmd =
      app.add_subcommand("embed", "Write sentence embeddings as JSON lines");
  embed_cmd->add_option("--model", model)->required();
  embed_cmd->add_option("--in", in)->required();
  embed_cmd->add_option("--out", out)->required();

  CLI11_PARSE(app, argc, argv);
  setup_logging(g.log_level);
  const uint64_t seed = g.seed.value_or(RunConfig{}.global_seed);

  if (normalize_cmd->parsed()) {
    write_corpus_file(out, normalize_corpus(load_corpus_file(in), norm));
  } else if (split_cmd->parsed()) {
    const SplitResult split =
        stratified_split(load_corpus_file(in), ratio, seed + kSplitSeedOffset);
    for (const auto& w : split.warnings) spdlog::warn(w);
    fs::create_directories(out);
    write_corpus_file((fs::path(out) / "train.csv").string(), split.train);
    write_corpus_file((fs::path(out) / "test.csv").string(), split.test);
    std::cout << "train " << split.train.size() << ", test "
              << split.test.size() << '\n';
  } else if (shots_cmd->parsed()) {
    ShotOptions options;
    options.balance_dialects = balance;
    const ShotSet shots = sample_shots(load_corpus_file(in), per_class,
                                       seed + kShotSeedOffset, options);
    for (const auto& w : shots.warnings) spdlog::warn(w);
    write_corpus_file(out, Corpus(shots.reviews));
  } else if (synth_cmd->parsed()) {
    write_corpus_file(out, generate_synthetic_corpus(spec, seed));
  } else if (train_cmd->parsed()) {
    RunConfig config = base_config(g);
    train_flags.apply(config);
    const auto provider = maybe_embeddings(embeddings);
    const TrainResult result =
        train_pipeline(load_corpus_file(in), config, provider.get());
    SerializeOptions options;
    options.include_timings = true;
    save_model_file(out, result.artifact, options);
    if (!log_out.empty()) {
      std::ofstream log = open_output(log_out);
      write_training_log(log, result.log);
    }
    const TrainingMetadata& m = result.artifact.metadata;
    std::cout << "trained on " << m.training_shots << " shots; stage 1 "
              << format_hms(m.stage1_seconds) << ", stage 2 "
              << format_hms(m.stage2_seconds) << ", total "
              << format_hms(m.total_seconds) << '\n';
    for (size_t e = 0; e < result.log.size(); ++e) {
      std::cout << "epoch " << result.log[e].epoch << " mean loss "
                << result.log[e].mean_loss << '\n';
    }
  } else if (predict_cmd->parsed()) {
    const ModelArtifact artifact = load_model_file(model);
    const auto provider = maybe_embeddings(embeddings);
    std::ifstream input(in, std::ios::binary);
    if (!input) throw InvalidArgument("cannot open '" + in + "'");
    std::ofstream output = open_output(out);
    predict_file(artifact, input, output, provider.get());
  } else if (evaluate_cmd->parsed()) {
    const ModelArtifact artifact = load_model_file(model);
    const auto provider = maybe_embeddings(embeddings);
    const EvalReport report =
        evaluate_pipeline(artifact, load_corpus_file(in), provider.get());
    print_dialect_table(std::cout, report);
    if (!out.empty()) write_json(out, report_to_json(report));
  } else if (sweep_cmd->parsed()) {
    RunConfig config = base_config(g);
    sweep_flags.apply(config);
    Corpus train = load_corpus_file(in);
    Corpus test;
    if (test_path.empty()) {
      SplitResult split =
          stratified_split(train, ratio, config.global_seed + kSplitSeedOffset);
      train = std::move(split.train);
      test = std::move(split.test);
    } else {
      test = load_corpus_file(test_path);
    }
    SweepOptions options;
    options.parallel = parallel;
    const SweepResult result =
        sweep(train, test, {grid_shots, grid_epochs, grid_seeds}, config, options);
    print_sweep_table(std::cout, result);
    if (!out.empty()) write_json(out, sweep_to_json(result));
  } else if (embed_cmd->parsed()) {
    const ModelArtifact artifact = load_model_file(model);
    if (!artifact.encoder) {
      throw InvalidArgument("model '" + model + "' has no encoder to embed with");
    }
    const Corpus corpus =
        normalize_corpus(load_corpus_file(in), artifact.normalization);
    std::ofstream output = open_output(out);
    for (const Review& r : corpus.reviews()) {
      const SentenceEmbedding e = encode(*artifact.encoder, r.text, r.id);
      output << nlohmann::json{{"id", r.id}, {"vec", e.vector}}.dump() << '\n';
    }
  }
  return 0;
}

}  // namespace fewshot

int main(int argc, char** argv) {
  try {
    return fewshot::run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
