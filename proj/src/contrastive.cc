#include "fewshot/contrastive.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "fewshot/errors.h"
#include "fewshot/random.h"

namespace fewshot {

void ContrastiveConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("contrastive: epochs must be >= 1");
  if (batch_size < 1) {
    throw InvalidArgument("contrastive: batch_size must be >= 1");
  }
  if (pair_iterations < 1) {
    throw InvalidArgument("contrastive: pair_iterations must be >= 1");
  }
  adam().validate();
}

PairSet generate_pairs(const ShotSet& shots, int iterations, uint64_t seed) {
  if (iterations < 1) {
    throw InvalidArgument("generate_pairs: iterations must be >= 1");
  }
  std::vector<Label> labels;
  std::vector<size_t> class_of(shots.size());
  for (size_t i = 0; i < shots.size(); ++i) {
    const auto& s = shots.reviews[i].sentiment;
    if (!s) {
      throw InvalidArgument("generate_pairs: shot '" + shots.reviews[i].id +
                            "' is unlabeled");
    }
    auto it = std::find(labels.begin(), labels.end(), *s);
    class_of[i] = static_cast<size_t>(it - labels.begin());
    if (it == labels.end()) labels.push_back(*s);
  }
  if (labels.size() < 2) {
    throw InvalidArgument(
        "generate_pairs: at least two classes are needed for negative pairs");
  }

  std::vector<std::vector<size_t>> members(labels.size());
  for (size_t i = 0; i < shots.size(); ++i) members[class_of[i]].push_back(i);

  PairSet out;
  for (size_t c = 0; c < labels.size(); ++c) {
    if (members[c].size() == 1) {
      std::string msg = "class '" + labels[c] +
                        "' has a single shot; its positive pairs are skipped";
      spdlog::warn(msg);
      out.warnings.push_back(std::move(msg));
    }
  }

  Rng rng(seed);
  out.pairs.reserve(2 * static_cast<size_t>(iterations) * shots.size());
  for (int r = 0; r < iterations; ++r) {
    for (size_t i = 0; i < shots.size(); ++i) {
      const auto& same = members[class_of[i]];
      if (same.size() > 1) {
        // Uniform over same-class members other than i.
        size_t k = rng.uniform_index(same.size() - 1);
        if (same[k] == i) k = same.size() - 1;
        out.pairs.push_back({i, same[k], 1.0});
      }
      const size_t others = shots.size() - same.size();
      size_t k = rng.uniform_index(others);
      // Walk the classes other than i's to find the k-th member.
      for (size_t c = 0; c < members.size(); ++c) {
        if (c == class_of[i]) continue;
        if (k < members[c].size()) {
          out.pairs.push_back({i, members[c][k], 0.0});
          break;
        }
        k -= members[c].size();
      }
    }
  }
  rng.shuffle(out.pairs);
  return out;
}

double cosine_similarity(std::span<const double> u,
                         std::span<const double> v) {
  if (u.size() != v.size()) {
    throw InvalidArgument("cosine_similarity: dimension mismatch");
  }
  const double nu = l2_norm(u);
  const double nv = l2_norm(v);
  if (nu == 0.0 || nv == 0.0) {
    throw NumericError("cosine_similarity: zero-norm vector");
  }
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

double pair_loss(std::span<const double> u, std::span<const double> v,
                 double target) {
  const double d = cosine_similarity(u, v) - target;
  return d * d;
}

double batch_loss(std::span<const Pair> batch,
                  std::span<const FeatureBag> features,
                  const EncoderParams& params) {
  if (batch.empty()) return 0.0;
  double sum = 0.0;
  for (const Pair& p : batch) {
    sum += pair_loss(pool_features(params.matrix, features[p.left]),
                     pool_features(params.matrix, features[p.right]),
                     p.target);
  }
  return sum / static_cast<double>(batch.size());
}

BatchGradient loss_gradient(std::span<const Pair> batch,
                            std::span<const FeatureBag> features,
                            std::span<const std::string> ids,
                            const EncoderParams& params) {
  const size_t dim = params.matrix.cols();
  BatchGradient out;
  out.grad.cols = dim;
  if (batch.empty()) return out;

  // Shots referenced by the batch, in first-use order.
  std::vector<size_t> shots;
  std::vector<size_t> slot_of_pair_side(2 * batch.size());
  auto slot = [&](size_t shot) {
    auto it = std::find(shots.begin(), shots.end(), shot);
    if (it != shots.end()) return static_cast<size_t>(it - shots.begin());
    shots.push_back(shot);
    return shots.size() - 1;
  };
  for (size_t k = 0; k < batch.size(); ++k) {
    slot_of_pair_side[2 * k] = slot(batch[k].left);
    slot_of_pair_side[2 * k + 1] = slot(batch[k].right);
  }

  std::vector<std::vector<double>> emb(shots.size());
  std::vector<double> norm(shots.size());
  for (size_t s = 0; s < shots.size(); ++s) {
    emb[s] = pool_features(params.matrix, features[shots[s]]);
    norm[s] = l2_norm(emb[s]);
    if (norm[s] == 0.0) {
      const std::string id =
          shots[s] < ids.size() ? ids[shots[s]] : std::to_string(shots[s]);
      throw NumericError("zero-norm embedding for review '" + id + "'");
    }
  }

  // dL/d(embedding), summed over the pairs each shot takes part in. Pairs are
  // reduced in batch order.
  std::vector<std::vector<double>> d_emb(shots.size(),
                                         std::vector<double>(dim, 0.0));
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  double loss_sum = 0.0;
  for (size_t k = 0; k < batch.size(); ++k) {
    const size_t a = slot_of_pair_side[2 * k];
    const size_t b = slot_of_pair_side[2 * k + 1];
    const auto& u = emb[a];
    const auto& v = emb[b];
    const double nu = norm[a];
    const double nv = norm[b];
    const double s = dot(u, v) / (nu * nv);
    const double diff = s - batch[k].target;
    loss_sum += diff * diff;

    const double scale = 2.0 * diff * inv_batch;
    const double inv_nunv = 1.0 / (nu * nv);
    const double s_over_nu2 = s / (nu * nu);
    const double s_over_nv2 = s / (nv * nv);
    for (size_t c = 0; c < dim; ++c) {
      d_emb[a][c] += scale * (v[c] * inv_nunv - s_over_nu2 * u[c]);
      d_emb[b][c] += scale * (u[c] * inv_nunv - s_over_nv2 * v[c]);
    }
  }
  out.loss = loss_sum * inv_batch;

  // Chain rule through mean pooling: row g of shot s receives
  // (multiplicity / |G|) * dL/d(embedding).
  std::vector<uint64_t>& rows = out.grad.rows;
  for (size_t s = 0; s < shots.size(); ++s) {
    for (const auto& [bucket, count] : features[shots[s]].counts) {
      rows.push_back(bucket);
    }
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  out.grad.values.assign(rows.size() * dim, 0.0);

  for (size_t s = 0; s < shots.size(); ++s) {
    const FeatureBag& bag = features[shots[s]];
    const double inv_total = 1.0 / static_cast<double>(bag.total);
    for (const auto& [bucket, count] : bag.counts) {
      const size_t r = static_cast<size_t>(
          std::lower_bound(rows.begin(), rows.end(), bucket) - rows.begin());
      double* dst = out.grad.values.data() + r * dim;
      const double w = count * inv_total;
      for (size_t c = 0; c < dim; ++c) dst[c] += w * d_emb[s][c];
    }
  }
  return out;
}

FinetuneResult finetune_encoder(EncoderParams params, const ShotSet& shots,
                                const ContrastiveConfig& config) {
  config.validate();
  params.config.validate();

  std::vector<FeatureBag> features;
  std::vector<std::string> ids;
  features.reserve(shots.size());
  for (const Review& r : shots.reviews) {
    try {
      features.push_back(featurize(r.text, params.config));
    } catch (const InvalidArgument&) {
      throw InvalidArgument("review '" + r.id + "' has no features (empty text)");
    }
    ids.push_back(r.id);
  }

  PairSet pair_set = generate_pairs(shots, config.pair_iterations, config.seed);
  std::vector<Pair>& pairs = pair_set.pairs;

  FinetuneResult result;
  result.warnings = std::move(pair_set.warnings);
  RowSparseAdam optimizer(params.matrix.rows(), params.matrix.cols(),
                          config.adam());
  Rng shuffle_rng(splitmix64(config.seed));
  const size_t batch = static_cast<size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(pairs);
    double loss_sum = 0.0;
    for (size_t begin = 0; begin < pairs.size(); begin += batch) {
      const size_t n = std::min(batch, pairs.size() - begin);
      const std::span<const Pair> chunk(pairs.data() + begin, n);
      BatchGradient g = loss_gradient(chunk, features, ids, params);
      loss_sum += g.loss * static_cast<double>(n);
      optimizer.step(params.matrix, g.grad);
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.pairs = pairs.size();
    entry.mean_loss =
        pairs.empty() ? 0.0 : loss_sum / static_cast<double>(pairs.size());
    entry.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    spdlog::info("stage 1 epoch {}: mean loss {:.6f} over {} pairs ({:.2f}s)",
                 entry.epoch, entry.mean_loss, entry.pairs, entry.seconds);
    result.log.push_back(entry);
  }
  result.params = std::move(params);
  return result;
}

void write_training_log(std::ostream& out, std::span<const EpochLog> log) {
  for (const EpochLog& e : log) {
    nlohmann::json record = {{"epoch", e.epoch},
                             {"mean_loss", e.mean_loss},
                             {"pairs", e.pairs},
                             {"seconds", e.seconds}};
    out << record.dump() << '\n';
  }
}

}  // namespace fewshot
