#ifndef FEWSHOT_CORPUS_H_
#define FEWSHOT_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fewshot/normalize.h"

namespace fewshot {

// Sentiment labels are carried as lowercase strings. The shared-task schema
// admits exactly these three.
using Label = std::string;
inline constexpr const char* kPositive = "positive";
inline constexpr const char* kNegative = "negative";
inline constexpr const char* kNeutral = "neutral";

struct Review {
  std::string id;
  std::string text;
  std::string dialect;
  std::optional<Label> sentiment;

  bool operator==(const Review&) const = default;
};

// Immutable ordered collection of reviews with unique ids. label_set and
// dialect_set list the distinct values in first-occurrence order.
class Corpus {
 public:
  Corpus() = default;
  // Throws DuplicateIdError listing every repeated id.
  explicit Corpus(std::vector<Review> reviews);

  const std::vector<Review>& reviews() const { return reviews_; }
  const std::vector<Label>& label_set() const { return label_set_; }
  const std::vector<std::string>& dialect_set() const { return dialect_set_; }
  size_t size() const { return reviews_.size(); }
  bool empty() const { return reviews_.empty(); }
  const Review& operator[](size_t i) const { return reviews_[i]; }

  bool fully_labeled() const;
  // Throws InvalidArgument naming the first unlabeled review.
  void require_labels(const char* operation) const;

  bool operator==(const Corpus& other) const {
    return reviews_ == other.reviews_;
  }

 private:
  std::vector<Review> reviews_;
  std::vector<Label> label_set_;
  std::vector<std::string> dialect_set_;
};

struct LoadOptions {
  // Accept any non-empty sentiment value instead of only the three
  // shared-task labels. Synthetic corpora with more than three classes need
  // this.
  bool allow_any_label = false;
};

// Parses CSV with columns ID, Sentiment, Text, Dialect (header names matched
// case-insensitively, any column order; Sentiment may be absent, and an empty
// Sentiment cell means unlabeled). Labels and dialect tags are lowercased.
//
// Throws SchemaError naming a missing column, RowError for an unknown
// sentiment or a short row, DuplicateIdError for repeated ids.
Corpus load_corpus(std::istream& in, const LoadOptions& options = {});
Corpus load_corpus_file(const std::string& path,
                        const LoadOptions& options = {});

// Writes the same four-column schema back out. Unlabeled reviews get an
// empty Sentiment cell.
void write_corpus(std::ostream& out, const Corpus& corpus);
void write_corpus_file(const std::string& path, const Corpus& corpus);

// Copy of `corpus` with every text passed through normalize_text.
Corpus normalize_corpus(const Corpus& corpus,
                        const NormalizationOptions& options = {});

// ---------------------------------------------------------------------------
// Distributions

struct ClassDistribution {
  struct Cell {
    Label label;
    std::string dialect;
    size_t count = 0;
    double fraction = 0.0;
  };
  // label_set x dialect_set, label-major. Empty cells are included.
  std::vector<Cell> cells;
  std::vector<Label> labels;
  std::vector<std::string> dialects;
  size_t total = 0;

  size_t count(const Label& label) const;
  size_t count(const Label& label, const std::string& dialect) const;
  double fraction(const Label& label) const;
};

// Throws InvalidArgument when any review is unlabeled.
ClassDistribution class_distribution(const Corpus& corpus);

// ---------------------------------------------------------------------------
// Splitting and sampling

struct SplitResult {
  Corpus train;
  Corpus test;
  std::vector<std::string> warnings;
};

// Stratifies on (sentiment, dialect) cells. Each cell first sends
// floor(ratio * size) reviews to train; the remaining train quota up to
// round(ratio * |corpus|) goes one review at a time to the cells with the
// largest fractional parts (ties: cell order). A cell with a single review
// sends it to train and records a warning. Which reviews of a cell land in
// train is decided by a seeded shuffle; both outputs keep corpus order.
SplitResult stratified_split(const Corpus& corpus, double ratio, uint64_t seed);

// The train size each (label, dialect) cell receives, label-major. Exposed so
// the allocation rule can be checked on its own.
std::vector<size_t> split_cell_quota(const std::vector<size_t>& cell_sizes,
                                     double ratio);

struct ShotSet {
  std::vector<Review> reviews;
  size_t requested_per_class = 0;
  uint64_t seed = 0;
  std::vector<std::string> warnings;

  size_t size() const { return reviews.size(); }
};

struct ShotOptions {
  // Spread each class's quota evenly across dialects (round-robin).
  bool balance_dialects = false;
};

// Draws min(n, class size) reviews per class without replacement. Output is
// grouped by label_set order, each group in draw order. Shortfalls are
// recorded in `warnings`. Throws InvalidArgument when n is zero.
ShotSet sample_shots(const Corpus& corpus, size_t n_per_class, uint64_t seed,
                     const ShotOptions& options = {});

// ---------------------------------------------------------------------------
// Synthetic corpora

struct SyntheticSpec {
  size_t classes = 3;
  size_t per_class = 100;
  size_t indicative_tokens_per_class = 40;
  size_t noise_tokens = 40;
  size_t tokens_per_text = 8;
};

// Builds a labeled corpus whose texts are space-joined tokens, at least 60%
// of them drawn from the class's private vocabulary and the rest from a
// shared noise vocabulary. Labels are assigned round-robin (positive,
// negative, neutral, then class_3, class_4, ...); within each class the
// dialect tag alternates between "dialect_a" and "dialect_b".
Corpus generate_synthetic_corpus(const SyntheticSpec& spec, uint64_t seed);

// Vocabularies used by generate_synthetic_corpus for the same (spec, seed):
// one list per class followed by the noise list.
std::vector<std::vector<std::string>> synthetic_vocabularies(
    const SyntheticSpec& spec, uint64_t seed);

}  // namespace fewshot

#endif  // FEWSHOT_CORPUS_H_
