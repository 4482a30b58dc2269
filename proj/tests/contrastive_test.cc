#include "fewshot/contrastive.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fewshot/errors.h"
#include "fewshot/random.h"
#include "test_util.h"

namespace fewshot {
namespace {

ShotSet make_shots(const std::vector<std::pair<std::string, size_t>>& classes) {
  ShotSet shots;
  size_t id = 0;
  for (const auto& [label, n] : classes) {
    for (size_t k = 0; k < n; ++k) {
      shots.reviews.push_back({"s" + std::to_string(id++),
                               "text " + std::to_string(id), "x", label});
    }
  }
  return shots;
}

TEST(GeneratePairsTest, CountsForSixtyFourShots) {
  const ShotSet shots =
      make_shots({{"positive", 64}, {"negative", 64}, {"neutral", 64}});
  const PairSet ps = generate_pairs(shots, 20, 1);
  EXPECT_EQ(ps.pairs.size(), 7680u);
  EXPECT_EQ(std::count_if(ps.pairs.begin(), ps.pairs.end(),
                          [](const Pair& p) { return p.target == 1.0; }),
            3840);
}

TEST(GeneratePairsTest, CountsForEightShots) {
  const ShotSet shots =
      make_shots({{"positive", 8}, {"negative", 8}, {"neutral", 8}});
  EXPECT_EQ(generate_pairs(shots, 20, 1).pairs.size(), 960u);
}

TEST(GeneratePairsTest, TargetsMatchLabelsExhaustively) {
  const ShotSet shots =
      make_shots({{"positive", 3}, {"negative", 3}, {"neutral", 3}});
  for (uint64_t seed = 0; seed < 50; ++seed) {
    for (const Pair& p : generate_pairs(shots, 5, seed).pairs) {
      ASSERT_NE(p.left, p.right);
      const bool same =
          shots.reviews[p.left].sentiment == shots.reviews[p.right].sentiment;
      ASSERT_EQ(p.target, same ? 1.0 : 0.0);
    }
  }
}

TEST(GeneratePairsTest, EachAnchorGetsOnePositiveAndOneNegativePerRound) {
  const ShotSet shots =
      make_shots({{"positive", 4}, {"negative", 2}, {"neutral", 5}});
  const PairSet ps = generate_pairs(shots, 7, 3);
  std::map<std::pair<size_t, double>, int> per_anchor;
  for (const Pair& p : ps.pairs) ++per_anchor[{p.left, p.target}];
  for (size_t i = 0; i < shots.size(); ++i) {
    EXPECT_EQ((per_anchor[{i, 1.0}]), 7);
    EXPECT_EQ((per_anchor[{i, 0.0}]), 7);
  }
}

TEST(GeneratePairsTest, PositivePartnersAreUniform) {
  // Anchor 0 of a 4-member class: each of the 3 partners ~1/3 of the time.
  const ShotSet shots = make_shots({{"positive", 4}, {"negative", 1}});
  const PairSet ps = generate_pairs(shots, 30000, 5);
  std::map<size_t, int> partner;
  for (const Pair& p : ps.pairs) {
    if (p.left == 0 && p.target == 1.0) ++partner[p.right];
  }
  ASSERT_EQ(partner.size(), 3u);
  for (const auto& [j, n] : partner) EXPECT_NEAR(n / 30000.0, 1.0 / 3, 0.015);
}

TEST(GeneratePairsTest, SingletonClassSkipsPositives) {
  const ShotSet shots = make_shots({{"positive", 3}, {"negative", 1}});
  const PairSet ps = generate_pairs(shots, 20, 2);
  EXPECT_EQ(ps.pairs.size(), 2u * 20 * 4 - 20);
  EXPECT_EQ(ps.warnings.size(), 1u);
}

TEST(GeneratePairsTest, SingleClassRejected) {
  EXPECT_THROW(generate_pairs(make_shots({{"positive", 5}}), 20, 1),
               InvalidArgument);
}

TEST(GeneratePairsTest, Deterministic) {
  const ShotSet shots =
      make_shots({{"positive", 5}, {"negative", 5}, {"neutral", 5}});
  EXPECT_EQ(generate_pairs(shots, 20, 9).pairs, generate_pairs(shots, 20, 9).pairs);
  EXPECT_NE(generate_pairs(shots, 20, 9).pairs,
            generate_pairs(shots, 20, 10).pairs);
}

TEST(CosineTest, Basics) {
  const std::vector<double> u = {3.0, -4.0, 1.0};
  EXPECT_NEAR(cosine_similarity(u, u), 1.0, 1e-15);
  const std::vector<double> e1 = {1, 0}, e2 = {0, 1}, m1 = {-1, 0};
  EXPECT_EQ(cosine_similarity(e1, e2), 0.0);
  EXPECT_EQ(cosine_similarity(e1, m1), -1.0);
  const std::vector<double> zero = {0, 0};
  EXPECT_THROW(cosine_similarity(e1, zero), NumericError);
}

TEST(PairLossTest, Basics) {
  const std::vector<double> e1 = {1, 0}, e2 = {0, 1};
  EXPECT_NEAR(pair_loss(e1, e1, 1.0), 0.0, 1e-15);
  EXPECT_EQ(pair_loss(e1, e2, 1.0), 1.0);
  EXPECT_EQ(pair_loss(e1, e2, 0.0), 0.0);
}

TEST(PairLossTest, BoundedByFour) {
  Rng rng(4);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> u(5), v(5);
    for (auto& x : u) x = rng.uniform(-1, 1);
    for (auto& x : v) x = rng.uniform(-1, 1);
    const double l = pair_loss(u, v, rng.uniform_index(2));
    EXPECT_GE(l, 0.0);
    EXPECT_LE(l, 4.0);
  }
}

struct GradientInstance {
  EncoderParams params;
  std::vector<FeatureBag> features;
  std::vector<std::string> ids;
  std::vector<Pair> pairs;
};

GradientInstance random_instance(uint64_t seed) {
  Rng rng(seed);
  GradientInstance inst;
  EncoderConfig config;
  config.buckets = 64;
  config.dim = 8;
  config.ngram_min = 2;
  config.ngram_max = 3;
  config.seed = seed;
  inst.params = init_encoder(config);
  const size_t n_texts = 4 + rng.uniform_index(5);
  for (size_t i = 0; i < n_texts; ++i) {
    std::string text;
    const size_t length = 1 + rng.uniform_index(6);
    for (size_t k = 0; k < length; ++k) {
      text.push_back(static_cast<char>('a' + rng.uniform_index(6)));
    }
    inst.features.push_back(featurize(text, config));
    inst.ids.push_back("t" + std::to_string(i));
  }
  const size_t n_pairs = 1 + rng.uniform_index(8);
  for (size_t k = 0; k < n_pairs; ++k) {
    const size_t a = rng.uniform_index(n_texts);
    size_t b = rng.uniform_index(n_texts - 1);
    if (b >= a) ++b;
    inst.pairs.push_back({a, b, static_cast<double>(rng.uniform_index(2))});
  }
  return inst;
}

TEST(LossGradientTest, MatchesCentralDifferences) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    GradientInstance inst = random_instance(seed);
    const BatchGradient g =
        loss_gradient(inst.pairs, inst.features, inst.ids, inst.params);
    EXPECT_NEAR(g.loss, batch_loss(inst.pairs, inst.features, inst.params),
                1e-14);
    const std::vector<double> analytic = g.grad.to_dense(64).data();

    EncoderParams probe = inst.params;
    const auto numeric = testing::central_differences(
        [&](const std::vector<double>& x) {
          probe.matrix.data() = x;
          return batch_loss(inst.pairs, inst.features, probe);
        },
        inst.params.matrix.data(), 1e-6);
    EXPECT_LE(testing::max_relative_error(analytic, numeric), 1e-5)
        << "seed " << seed;
  }
}

TEST(LossGradientTest, PerfectPositivePairHasZeroGradient) {
  GradientInstance inst = random_instance(3);
  inst.features.push_back(inst.features[0]);
  inst.ids.push_back("copy");
  const std::vector<Pair> batch = {{0, inst.features.size() - 1, 1.0}};
  const BatchGradient g =
      loss_gradient(batch, inst.features, inst.ids, inst.params);
  for (double v : g.grad.values) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(LossGradientTest, UntouchedRowsAreAbsent) {
  GradientInstance inst = random_instance(5);
  const BatchGradient g =
      loss_gradient(inst.pairs, inst.features, inst.ids, inst.params);
  std::vector<uint64_t> used;
  for (const Pair& p : inst.pairs) {
    for (size_t s : {p.left, p.right}) {
      for (const auto& [b, c] : inst.features[s].counts) used.push_back(b);
    }
  }
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  EXPECT_EQ(g.grad.rows, used);
}

TEST(LossGradientTest, ScalingSourceRowsKeepsResidual) {
  // One feature per text ("x" framed, trigrams only), so each embedding is a
  // single row; doubling those rows leaves the cosine unchanged.
  EncoderConfig c;
  c.buckets = 64;
  c.dim = 8;
  c.ngram_min = c.ngram_max = 3;
  EncoderParams p = init_encoder(c);
  std::vector<FeatureBag> f = {featurize("x", c), featurize("y", c)};
  ASSERT_EQ(f[0].total, 1u);
  ASSERT_NE(f[0].counts[0].first, f[1].counts[0].first);
  const std::vector<Pair> batch = {{0, 1, 1.0}};
  const double before = batch_loss(batch, f, p);
  for (const auto& bag : f) {
    for (double& v : p.matrix.row(bag.counts[0].first)) v *= 2.0;
  }
  EXPECT_NEAR(batch_loss(batch, f, p), before, 1e-14);
}

TEST(LossGradientTest, ZeroEmbeddingNamesReview) {
  GradientInstance inst = random_instance(2);
  for (const auto& [b, c] : inst.features[inst.pairs[0].left].counts) {
    for (double& v : inst.params.matrix.row(b)) v = 0.0;
  }
  try {
    loss_gradient(inst.pairs, inst.features, inst.ids, inst.params);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find(inst.ids[inst.pairs[0].left]),
              std::string::npos);
  }
}

TEST(BatchLossTest, PermutationInvariant) {
  GradientInstance inst = random_instance(11);
  std::vector<Pair> shuffled = inst.pairs;
  std::reverse(shuffled.begin(), shuffled.end());
  EXPECT_NEAR(batch_loss(shuffled, inst.features, inst.params),
              batch_loss(inst.pairs, inst.features, inst.params), 1e-15);
}

ShotSet synthetic_shots(size_t per_class, uint64_t seed) {
  const Corpus corpus = generate_synthetic_corpus({3, 40, 30, 20, 8}, seed);
  return sample_shots(corpus, per_class, seed);
}

TEST(FinetuneTest, RejectsZeroEpochs) {
  ContrastiveConfig config;
  config.epochs = 0;
  EncoderConfig ec;
  ec.buckets = 1024;
  ec.dim = 8;
  EXPECT_THROW(finetune_encoder(init_encoder(ec), synthetic_shots(4, 1), config),
               InvalidArgument);
}

TEST(FinetuneTest, OneEpochGivesFiniteParamsAndOneLogEntry) {
  ContrastiveConfig config;
  config.epochs = 1;
  EncoderConfig ec;
  ec.buckets = 1024;
  ec.dim = 16;
  const FinetuneResult r =
      finetune_encoder(init_encoder(ec), synthetic_shots(4, 1), config);
  ASSERT_EQ(r.log.size(), 1u);
  EXPECT_EQ(r.log[0].pairs, 2u * 20 * 12);
  for (double v : r.params.matrix.data()) ASSERT_TRUE(std::isfinite(v));
}

TEST(FinetuneTest, LossDecreasesOverEpochs) {
  EncoderConfig ec;
  ec.buckets = 4096;
  ec.dim = 32;
  const FinetuneResult r =
      finetune_encoder(init_encoder(ec), synthetic_shots(8, 3), {});
  ASSERT_EQ(r.log.size(), 3u);
  EXPECT_LT(r.log[1].mean_loss, r.log[0].mean_loss);
  EXPECT_LT(r.log[2].mean_loss, r.log[1].mean_loss);
}

TEST(FinetuneTest, BitIdenticalUnderSeed) {
  EncoderConfig ec;
  ec.buckets = 1024;
  ec.dim = 8;
  ContrastiveConfig config;
  config.seed = 17;
  const ShotSet shots = synthetic_shots(4, 2);
  const auto a = finetune_encoder(init_encoder(ec), shots, config);
  const auto b = finetune_encoder(init_encoder(ec), shots, config);
  EXPECT_EQ(a.params.matrix, b.params.matrix);
}

TEST(TrainingLogTest, JsonLinesSchema) {
  const std::vector<EpochLog> log = {{1, 0.5, 960, 1.25}, {2, 0.25, 960, 1.0}};
  std::ostringstream out;
  write_training_log(out, log);
  std::istringstream in(out.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["epoch"], log[n].epoch);
    EXPECT_EQ(j["mean_loss"], log[n].mean_loss);
    EXPECT_EQ(j["pairs"], log[n].pairs);
    EXPECT_EQ(j["seconds"], log[n].seconds);
    ++n;
  }
  EXPECT_EQ(n, 2);
}

}  // namespace
}  // namespace fewshot
