#include "fewshot/encoder.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fewshot/csv.h"
#include "fewshot/errors.h"
#include "fewshot/random.h"
#include "fewshot/unicode.h"

namespace fewshot {

void EncoderConfig::validate() const {
  if (ngram_min < 1) throw InvalidArgument("encoder: ngram_min must be >= 1");
  if (ngram_max < ngram_min) {
    throw InvalidArgument("encoder: ngram_max must be >= ngram_min");
  }
  if (buckets < 2 || (buckets & (buckets - 1)) != 0) {
    throw InvalidArgument("encoder: buckets must be a power of two >= 2");
  }
  if (dim < 2) throw InvalidArgument("encoder: dim must be >= 2");
}

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

FeatureBag featurize(std::string_view text, const EncoderConfig& config) {
  if (text.empty()) {
    throw InvalidArgument("cannot featurize empty text");
  }
  std::u32string marked;
  marked.push_back(kTextBeginMarker);
  marked += utf8_to_utf32(text);
  marked.push_back(kTextEndMarker);

  // Byte offsets of each code point in the UTF-8 form of `marked`, so every
  // n-gram is a substring view.
  std::string utf8;
  std::vector<size_t> offsets;
  offsets.reserve(marked.size() + 1);
  for (char32_t cp : marked) {
    offsets.push_back(utf8.size());
    append_utf8(cp, utf8);
  }
  offsets.push_back(utf8.size());

  const uint64_t mask = config.buckets - 1;
  const size_t length = marked.size();
  std::vector<uint64_t> buckets;
  for (int n = config.ngram_min; n <= config.ngram_max; ++n) {
    const size_t width = static_cast<size_t>(n);
    if (width > length) break;
    for (size_t start = 0; start + width <= length; ++start) {
      const std::string_view gram(utf8.data() + offsets[start],
                                  offsets[start + width] - offsets[start]);
      buckets.push_back(fnv1a64(gram) & mask);
    }
  }

  std::sort(buckets.begin(), buckets.end());
  FeatureBag bag;
  bag.total = buckets.size();
  for (uint64_t b : buckets) {
    if (!bag.counts.empty() && bag.counts.back().first == b) {
      ++bag.counts.back().second;
    } else {
      bag.counts.emplace_back(b, 1);
    }
  }
  return bag;
}

EncoderParams init_encoder(const EncoderConfig& config) {
  config.validate();
  EncoderParams params;
  params.config = config;
  params.matrix = Matrix(config.buckets, static_cast<size_t>(config.dim));
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.dim));
  Rng rng(config.seed);
  for (double& v : params.matrix.data()) v = rng.uniform(-bound, bound);
  return params;
}

std::vector<double> pool_features(const Matrix& matrix, const FeatureBag& bag) {
  std::vector<double> e(matrix.cols(), 0.0);
  if (bag.total == 0) {
    throw InvalidArgument("cannot pool an empty feature multiset");
  }
  for (const auto& [bucket, count] : bag.counts) {
    const auto row = matrix.row(bucket);
    for (size_t k = 0; k < e.size(); ++k) e[k] += count * row[k];
  }
  const double inv = 1.0 / static_cast<double>(bag.total);
  for (double& v : e) v *= inv;
  return e;
}

SentenceEmbedding encode(const EncoderParams& params, std::string_view text,
                         std::string source_id) {
  return {pool_features(params.matrix, featurize(text, params.config)),
          std::move(source_id)};
}

// ---------------------------------------------------------------------------

SentenceEmbedding PrecomputedEmbeddings::embed(const Review& review) const {
  return {lookup(review.id), review.id};
}

const std::vector<double>& PrecomputedEmbeddings::lookup(
    const std::string& id) const {
  auto it = table_.find(id);
  if (it == table_.end()) {
    throw InvalidArgument("no precomputed embedding for id '" + id + "'");
  }
  return it->second;
}

namespace {

bool parse_double(const std::string& s, double& out) {
  std::istringstream in(s);
  in.imbue(std::locale::classic());
  in >> out;
  return !in.fail() && (in >> std::ws).eof();
}

}  // namespace

PrecomputedEmbeddings load_precomputed_provider(std::istream& in) {
  PrecomputedEmbeddings provider;
  auto add = [&](std::string id, std::vector<double> vec, size_t row) {
    if (vec.empty()) {
      throw SchemaError("embedding row " + std::to_string(row) +
                        " has no vector");
    }
    for (double v : vec) {
      if (!std::isfinite(v)) {
        throw SchemaError("embedding for '" + id + "' is not finite");
      }
    }
    if (provider.dim_ == 0) provider.dim_ = vec.size();
    if (vec.size() != provider.dim_) {
      throw SchemaError("embedding for '" + id + "' has length " +
                        std::to_string(vec.size()) + ", expected " +
                        std::to_string(provider.dim_));
    }
    if (!provider.table_.emplace(id, std::move(vec)).second) {
      throw DuplicateIdError("duplicate embedding id '" + id + "'");
    }
  };

  in >> std::ws;
  if (in.peek() == '{') {
    std::string line;
    size_t row = 0;
    while (std::getline(in, line)) {
      ++row;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::json record;
      try {
        record = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError("embedding line " + std::to_string(row) + ": " +
                          e.what());
      }
      if (!record.contains("id") || !record.contains("vec") ||
          !record["vec"].is_array()) {
        throw SchemaError("embedding line " + std::to_string(row) +
                          " needs \"id\" and \"vec\"");
      }
      const auto& id = record["id"];
      add(id.is_string() ? id.get<std::string>() : id.dump(),
          record["vec"].get<std::vector<double>>(), row);
    }
  } else {
    const auto records = read_csv(in);
    for (size_t r = 0; r < records.size(); ++r) {
      const CsvRecord& rec = records[r];
      std::vector<double> vec;
      bool numeric = rec.size() > 1;
      for (size_t c = 1; c < rec.size() && numeric; ++c) {
        double v;
        numeric = parse_double(rec[c], v);
        vec.push_back(v);
      }
      if (!numeric) {
        if (r == 0) continue;  // header
        throw SchemaError("embedding row " + std::to_string(r + 1) +
                          " has a non-numeric value");
      }
      add(rec[0], std::move(vec), r + 1);
    }
  }
  if (provider.table_.empty()) {
    throw SchemaError("embedding table is empty; dimension undeterminable");
  }
  return provider;
}

PrecomputedEmbeddings load_precomputed_provider_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open embedding table '" + path + "'");
  return load_precomputed_provider(in);
}

}  // namespace fewshot
