#include "fewshot/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "fewshot/csv.h"
#include "fewshot/errors.h"
#include "fewshot/random.h"
#include "fewshot/unicode.h"

namespace fewshot {
namespace {

std::string to_lower_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool is_known_sentiment(const std::string& label) {
  return label == kPositive || label == kNegative || label == kNeutral;
}

template <typename T>
size_t index_of(const std::vector<T>& values, const T& v) {
  return static_cast<size_t>(std::find(values.begin(), values.end(), v) -
                             values.begin());
}

// Reviews grouped by (label, dialect), label-major over the corpus sets.
std::vector<std::vector<size_t>> cells_of(const Corpus& corpus) {
  const auto& labels = corpus.label_set();
  const auto& dialects = corpus.dialect_set();
  std::vector<std::vector<size_t>> cells(labels.size() * dialects.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    const Review& r = corpus[i];
    const size_t li = index_of(labels, *r.sentiment);
    const size_t di = index_of(dialects, r.dialect);
    cells[li * dialects.size() + di].push_back(i);
  }
  return cells;
}

Corpus select(const Corpus& corpus, const std::vector<bool>& keep, bool value) {
  std::vector<Review> out;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (keep[i] == value) out.push_back(corpus[i]);
  }
  return Corpus(std::move(out));
}

}  // namespace

Corpus::Corpus(std::vector<Review> reviews) : reviews_(std::move(reviews)) {
  std::unordered_set<std::string> seen;
  std::vector<std::string> duplicates;
  for (const Review& r : reviews_) {
    if (!seen.insert(r.id).second &&
        std::find(duplicates.begin(), duplicates.end(), r.id) ==
            duplicates.end()) {
      duplicates.push_back(r.id);
    }
    if (r.sentiment &&
        std::find(label_set_.begin(), label_set_.end(), *r.sentiment) ==
            label_set_.end()) {
      label_set_.push_back(*r.sentiment);
    }
    if (std::find(dialect_set_.begin(), dialect_set_.end(), r.dialect) ==
        dialect_set_.end()) {
      dialect_set_.push_back(r.dialect);
    }
  }
  if (!duplicates.empty()) {
    std::string msg = "duplicate review id(s):";
    for (const auto& id : duplicates) msg += " " + id;
    throw DuplicateIdError(msg);
  }
}

bool Corpus::fully_labeled() const {
  return std::all_of(reviews_.begin(), reviews_.end(),
                     [](const Review& r) { return r.sentiment.has_value(); });
}

void Corpus::require_labels(const char* operation) const {
  for (const Review& r : reviews_) {
    if (!r.sentiment) {
      throw InvalidArgument(std::string(operation) +
                            " requires labeled reviews; review '" + r.id +
                            "' has no sentiment");
    }
  }
}

// ---------------------------------------------------------------------------

Corpus load_corpus(std::istream& in, const LoadOptions& options) {
  const std::vector<CsvRecord> records = read_csv(in);
  if (records.empty()) throw SchemaError("CSV input has no header row");

  std::map<std::string, size_t> column;
  for (size_t c = 0; c < records[0].size(); ++c) {
    column.emplace(to_lower_ascii(trim(records[0][c])), c);
  }
  for (const char* required : {"id", "text", "dialect"}) {
    if (!column.count(required)) {
      const std::string name = required == std::string("id") ? "ID"
                               : required == std::string("text")
                                   ? "Text"
                                   : "Dialect";
      throw SchemaError("missing required column '" + name + "'");
    }
  }
  const size_t id_col = column["id"];
  const size_t text_col = column["text"];
  const size_t dialect_col = column["dialect"];
  const bool has_sentiment = column.count("sentiment") > 0;
  const size_t sentiment_col = has_sentiment ? column["sentiment"] : 0;
  const size_t needed =
      std::max({id_col, text_col, dialect_col, sentiment_col}) + 1;

  std::vector<Review> reviews;
  reviews.reserve(records.size() - 1);
  for (size_t r = 1; r < records.size(); ++r) {
    const CsvRecord& rec = records[r];
    if (rec.size() < needed) {
      throw RowError(r, "expected at least " + std::to_string(needed) +
                            " fields, found " + std::to_string(rec.size()));
    }
    Review review;
    review.id = trim(rec[id_col]);
    review.text = rec[text_col];
    review.dialect = to_lower_ascii(trim(rec[dialect_col]));
    if (has_sentiment) {
      std::string label = to_lower_ascii(trim(rec[sentiment_col]));
      if (!label.empty()) {
        if (!options.allow_any_label && !is_known_sentiment(label)) {
          throw RowError(r, "unknown sentiment '" + rec[sentiment_col] +
                                "' for review '" + review.id + "'");
        }
        review.sentiment = std::move(label);
      }
    }
    reviews.push_back(std::move(review));
  }
  return Corpus(std::move(reviews));
}

Corpus load_corpus_file(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open corpus file '" + path + "'");
  return load_corpus(in, options);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  const std::vector<std::string> header = {"ID", "Sentiment", "Text",
                                           "Dialect"};
  write_csv_record(out, header);
  for (const Review& r : corpus.reviews()) {
    const std::vector<std::string> row = {r.id, r.sentiment.value_or(""),
                                          r.text, r.dialect};
    write_csv_record(out, row);
  }
}

void write_corpus_file(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write corpus file '" + path + "'");
  write_corpus(out, corpus);
}

Corpus normalize_corpus(const Corpus& corpus,
                        const NormalizationOptions& options) {
  std::vector<Review> out = corpus.reviews();
  for (Review& r : out) r.text = normalize_text(r.text, options);
  return Corpus(std::move(out));
}

// ---------------------------------------------------------------------------

size_t ClassDistribution::count(const Label& label) const {
  size_t n = 0;
  for (const Cell& c : cells) {
    if (c.label == label) n += c.count;
  }
  return n;
}

size_t ClassDistribution::count(const Label& label,
                                const std::string& dialect) const {
  for (const Cell& c : cells) {
    if (c.label == label && c.dialect == dialect) return c.count;
  }
  return 0;
}

double ClassDistribution::fraction(const Label& label) const {
  return total == 0 ? 0.0
                    : static_cast<double>(count(label)) /
                          static_cast<double>(total);
}

ClassDistribution class_distribution(const Corpus& corpus) {
  corpus.require_labels("class_distribution");
  ClassDistribution dist;
  dist.labels = corpus.label_set();
  dist.dialects = corpus.dialect_set();
  dist.total = corpus.size();
  const auto cells = cells_of(corpus);
  for (size_t li = 0; li < dist.labels.size(); ++li) {
    for (size_t di = 0; di < dist.dialects.size(); ++di) {
      ClassDistribution::Cell cell;
      cell.label = dist.labels[li];
      cell.dialect = dist.dialects[di];
      cell.count = cells[li * dist.dialects.size() + di].size();
      cell.fraction = static_cast<double>(cell.count) /
                      static_cast<double>(dist.total);
      dist.cells.push_back(std::move(cell));
    }
  }
  return dist;
}

// ---------------------------------------------------------------------------

std::vector<size_t> split_cell_quota(const std::vector<size_t>& cell_sizes,
                                     double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw InvalidArgument("split ratio must lie in (0, 1), got " +
                          std::to_string(ratio));
  }
  const size_t total = std::accumulate(cell_sizes.begin(), cell_sizes.end(),
                                       size_t{0});
  // The 1e-9 slack keeps products such as 0.8 * 5 from flooring to 3.
  auto floor_of = [](double x) {
    return static_cast<size_t>(std::floor(x + 1e-9));
  };
  const size_t target = static_cast<size_t>(
      std::llround(ratio * static_cast<double>(total)));

  std::vector<size_t> quota(cell_sizes.size(), 0);
  std::vector<double> remainder(cell_sizes.size(), -1.0);
  size_t assigned = 0;
  for (size_t c = 0; c < cell_sizes.size(); ++c) {
    if (cell_sizes[c] == 1) {
      quota[c] = 1;
    } else {
      const double exact = ratio * static_cast<double>(cell_sizes[c]);
      quota[c] = floor_of(exact);
      if (quota[c] < cell_sizes[c]) {
        remainder[c] = std::max(0.0, exact - static_cast<double>(quota[c]));
      }
    }
    assigned += quota[c];
  }

  std::vector<size_t> order(cell_sizes.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return remainder[a] > remainder[b];
  });
  for (size_t k = 0; k < order.size() && assigned < target; ++k) {
    const size_t c = order[k];
    if (remainder[c] < 0.0) continue;
    ++quota[c];
    ++assigned;
  }
  return quota;
}

SplitResult stratified_split(const Corpus& corpus, double ratio,
                             uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw InvalidArgument("split ratio must lie in (0, 1), got " +
                          std::to_string(ratio));
  }
  corpus.require_labels("stratified_split");

  SplitResult result;
  auto cells = cells_of(corpus);
  std::vector<size_t> sizes;
  for (const auto& cell : cells) sizes.push_back(cell.size());
  const std::vector<size_t> quota = split_cell_quota(sizes, ratio);

  Rng rng(seed);
  std::vector<bool> in_train(corpus.size(), false);
  const size_t n_dialects = corpus.dialect_set().size();
  for (size_t c = 0; c < cells.size(); ++c) {
    if (cells[c].size() == 1) {
      std::string msg = "split cell (" + corpus.label_set()[c / n_dialects] +
                        ", " + corpus.dialect_set()[c % n_dialects] +
                        ") has a single review; it goes to train";
      spdlog::warn(msg);
      result.warnings.push_back(std::move(msg));
    }
    rng.shuffle(cells[c]);
    for (size_t k = 0; k < quota[c]; ++k) in_train[cells[c][k]] = true;
  }
  result.train = select(corpus, in_train, true);
  result.test = select(corpus, in_train, false);
  return result;
}

ShotSet sample_shots(const Corpus& corpus, size_t n_per_class, uint64_t seed,
                     const ShotOptions& options) {
  if (n_per_class == 0) {
    throw InvalidArgument("sample_shots needs at least one shot per class");
  }
  corpus.require_labels("sample_shots");

  ShotSet shots;
  shots.requested_per_class = n_per_class;
  shots.seed = seed;
  Rng rng(seed);

  for (const Label& label : corpus.label_set()) {
    std::vector<size_t> members;
    for (size_t i = 0; i < corpus.size(); ++i) {
      if (*corpus[i].sentiment == label) members.push_back(i);
    }
    const size_t take = std::min(n_per_class, members.size());
    if (take < n_per_class) {
      std::string msg = "class '" + label + "' has only " +
                        std::to_string(members.size()) + " reviews; " +
                        std::to_string(n_per_class) + " requested";
      spdlog::warn(msg);
      shots.warnings.push_back(std::move(msg));
    }

    std::vector<size_t> drawn;
    if (!options.balance_dialects) {
      // Partial Fisher-Yates: the first `take` slots are a uniform sample.
      for (size_t k = 0; k < take; ++k) {
        const size_t j = k + rng.uniform_index(members.size() - k);
        std::swap(members[k], members[j]);
        drawn.push_back(members[k]);
      }
    } else {
      std::vector<std::vector<size_t>> by_dialect(corpus.dialect_set().size());
      for (size_t i : members) {
        by_dialect[index_of(corpus.dialect_set(), corpus[i].dialect)]
            .push_back(i);
      }
      for (auto& group : by_dialect) rng.shuffle(group);
      std::vector<size_t> cursor(by_dialect.size(), 0);
      while (drawn.size() < take) {
        for (size_t d = 0; d < by_dialect.size() && drawn.size() < take; ++d) {
          if (cursor[d] < by_dialect[d].size()) {
            drawn.push_back(by_dialect[d][cursor[d]++]);
          }
        }
      }
    }
    for (size_t i : drawn) shots.reviews.push_back(corpus[i]);
  }
  return shots;
}

// ---------------------------------------------------------------------------

namespace {

// Arabic consonants that no default normalization step rewrites.
constexpr char32_t kSyntheticAlphabet[] = {
    U'ب', U'ت', U'ث', U'ج', U'ح', U'خ', U'د', U'ذ', U'ر', U'ز',
    U'س', U'ش', U'ص', U'ض', U'ط', U'ظ', U'ع', U'غ', U'ف', U'ق',
    U'ك', U'ل', U'م', U'ن', U'ه', U'و', U'ي'};

std::string synthetic_label(size_t k) {
  switch (k) {
    case 0:
      return kPositive;
    case 1:
      return kNegative;
    case 2:
      return kNeutral;
    default:
      return "class_" + std::to_string(k);
  }
}

void require_positive(size_t value, const char* name) {
  if (value == 0) {
    throw InvalidArgument(std::string("synthetic corpus: ") + name +
                          " must be positive");
  }
}

}  // namespace

std::vector<std::vector<std::string>> synthetic_vocabularies(
    const SyntheticSpec& spec, uint64_t seed) {
  require_positive(spec.classes, "classes");
  require_positive(spec.per_class, "per_class");
  require_positive(spec.indicative_tokens_per_class,
                   "indicative_tokens_per_class");
  require_positive(spec.noise_tokens, "noise_tokens");
  require_positive(spec.tokens_per_text, "tokens_per_text");

  Rng rng(splitmix64(seed));
  std::set<std::string> used;
  auto fresh_token = [&] {
    for (;;) {
      const size_t length = 3 + rng.uniform_index(4);
      std::string token;
      for (size_t k = 0; k < length; ++k) {
        append_utf8(kSyntheticAlphabet[rng.uniform_index(
                        std::size(kSyntheticAlphabet))],
                    token);
      }
      if (used.insert(token).second) return token;
    }
  };

  std::vector<std::vector<std::string>> vocab(spec.classes + 1);
  for (size_t c = 0; c < spec.classes; ++c) {
    for (size_t k = 0; k < spec.indicative_tokens_per_class; ++k) {
      vocab[c].push_back(fresh_token());
    }
  }
  for (size_t k = 0; k < spec.noise_tokens; ++k) {
    vocab[spec.classes].push_back(fresh_token());
  }
  return vocab;
}

Corpus generate_synthetic_corpus(const SyntheticSpec& spec, uint64_t seed) {
  const auto vocab = synthetic_vocabularies(spec, seed);
  const auto& noise = vocab.back();
  const size_t indicative = static_cast<size_t>(
      std::ceil(0.6 * static_cast<double>(spec.tokens_per_text)));

  Rng rng(seed);
  std::vector<Review> reviews;
  const size_t total = spec.classes * spec.per_class;
  const int width = static_cast<int>(std::to_string(total).size());
  for (size_t i = 0; i < total; ++i) {
    const size_t cls = i % spec.classes;
    const size_t nth_in_class = i / spec.classes;

    std::vector<const std::string*> tokens;
    for (size_t k = 0; k < spec.tokens_per_text; ++k) {
      const auto& source = k < indicative ? vocab[cls] : noise;
      tokens.push_back(&source[rng.uniform_index(source.size())]);
    }
    rng.shuffle(tokens);

    Review r;
    std::ostringstream id;
    id << "syn-";
    id.width(width);
    id.fill('0');
    id << i;
    r.id = id.str();
    for (size_t k = 0; k < tokens.size(); ++k) {
      if (k > 0) r.text += ' ';
      r.text += *tokens[k];
    }
    r.dialect = nth_in_class % 2 == 0 ? "dialect_a" : "dialect_b";
    r.sentiment = synthetic_label(cls);
    reviews.push_back(std::move(r));
  }
  return Corpus(std::move(reviews));
}

}  // namespace fewshot
