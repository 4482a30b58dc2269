#ifndef FEWSHOT_ENCODER_H_
#define FEWSHOT_ENCODER_H_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fewshot/corpus.h"
#include "fewshot/matrix.h"

namespace fewshot {

// Hashed character n-gram backbone. Text is framed by two sentinel code
// points, every n-gram with ngram_min <= n <= ngram_max is hashed with
// 64-bit FNV-1a over its UTF-8 bytes, and the hash is reduced mod `buckets`.
struct EncoderConfig {
  int ngram_min = 3;
  int ngram_max = 5;
  uint64_t buckets = uint64_t{1} << 16;
  int dim = 64;
  uint64_t seed = 0;

  // Throws InvalidArgument.
  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

// Boundary sentinels: STX before the text, ETX after it.
inline constexpr char32_t kTextBeginMarker = U'\u0002';
inline constexpr char32_t kTextEndMarker = U'\u0003';

uint64_t fnv1a64(std::string_view bytes);

// Multiset of bucket indices, stored as (bucket, multiplicity) pairs sorted
// by bucket.
struct FeatureBag {
  std::vector<std::pair<uint64_t, uint32_t>> counts;
  size_t total = 0;

  bool operator==(const FeatureBag&) const = default;
};

// Throws InvalidArgument when text is empty (no features).
FeatureBag featurize(std::string_view text, const EncoderConfig& config);

struct EncoderParams {
  EncoderConfig config;
  Matrix matrix;  // buckets x dim
};

// Entries drawn i.i.d. from Uniform(-1/sqrt(dim), 1/sqrt(dim)) under
// config.seed.
EncoderParams init_encoder(const EncoderConfig& config);

struct SentenceEmbedding {
  std::vector<double> vector;
  std::string source_id;
};

// Mean of the matrix rows selected by the feature multiset.
std::vector<double> pool_features(const Matrix& matrix, const FeatureBag& bag);

// Throws InvalidArgument when text yields no features.
SentenceEmbedding encode(const EncoderParams& params, std::string_view text,
                         std::string source_id = {});

// ---------------------------------------------------------------------------
// Providers

// Source of embeddings for already-normalized reviews.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual size_t dim() const = 0;
  virtual SentenceEmbedding embed(const Review& review) const = 0;
  // True when the provider has parameters that stage 1 can fine-tune.
  virtual bool trainable() const = 0;
};

class HashedNgramEncoder : public EmbeddingProvider {
 public:
  explicit HashedNgramEncoder(const EncoderParams& params) : params_(params) {}

  size_t dim() const override { return params_.matrix.cols(); }
  SentenceEmbedding embed(const Review& review) const override {
    return encode(params_, review.text, review.id);
  }
  bool trainable() const override { return true; }

 private:
  const EncoderParams& params_;
};

// Embeddings exported offline by an external sentence encoder, looked up by
// review id.
class PrecomputedEmbeddings : public EmbeddingProvider {
 public:
  size_t dim() const override { return dim_; }
  // Throws InvalidArgument naming an unknown id.
  SentenceEmbedding embed(const Review& review) const override;
  bool trainable() const override { return false; }

  const std::vector<double>& lookup(const std::string& id) const;
  size_t size() const { return table_.size(); }
  bool contains(const std::string& id) const { return table_.count(id) > 0; }

 private:
  friend PrecomputedEmbeddings load_precomputed_provider(std::istream& in);

  size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> table_;
};

// Reads either CSV rows (id, v1, ..., vd; an optional header row is skipped)
// or JSON lines ({"id": ..., "vec": [...]}), chosen by the first
// non-whitespace byte. Throws SchemaError on an empty table or inconsistent
// vector lengths, DuplicateIdError on a repeated id.
PrecomputedEmbeddings load_precomputed_provider(std::istream& in);
PrecomputedEmbeddings load_precomputed_provider_file(const std::string& path);

}  // namespace fewshot

#endif  // FEWSHOT_ENCODER_H_
