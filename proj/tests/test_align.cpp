#include <cmath>

#include <gtest/gtest.h>

#include "dp/align.hpp"

using dp::Description;
using dp::Tensor;
namespace tok = dp::tok;

namespace {

Tensor random_row(dp::Rng& rng, int d, double scale = 1.0) {
  Tensor t(1, d);
  for (size_t i = 0; i < t.size(); ++i) t.data()[i] = scale * rng.normal();
  return t;
}

Tensor random_table(dp::Rng& rng, int d) {
  Tensor t(dp::kVocabSize, d);
  for (size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.normal();
  return t;
}

}  // namespace

TEST(EmbedDescription, SingleTokenBodyIsThatRow) {
  dp::Rng rng(41);
  const Tensor table = random_table(rng, 6);
  const Description d{tok::BOS, tok::NONE, tok::EOS};
  const Tensor v = dp::embed_description(d, table);
  for (int j = 0; j < 6; ++j) EXPECT_EQ(v.at(0, j), table.at(tok::NONE, j));
}

TEST(EmbedDescription, TwoTokenBodyIsTheMean) {
  dp::Rng rng(42);
  const Tensor table = random_table(rng, 5);
  const Description d{tok::BOS, tok::CAR, tok::AHEAD, tok::EOS};
  const Tensor v = dp::embed_description(d, table);
  for (int j = 0; j < 5; ++j)
    EXPECT_NEAR(v.at(0, j), 0.5 * (table.at(tok::CAR, j) + table.at(tok::AHEAD, j)), 1e-15);
}

TEST(EmbedDescription, EmptyBodyIsAnError) {
  dp::Rng rng(43);
  const Tensor table = random_table(rng, 4);
  EXPECT_THROW(dp::embed_description({tok::BOS, tok::EOS}, table), dp::DataError);
}

TEST(EmbedDescription, GradientReachesTable) {
  dp::Rng rng(44);
  const Description d{tok::BOS, tok::CAR, tok::NEAR, tok::CAR, tok::EOS};  // repeated id
  const double err = dp::grad_check(
      [&](const std::vector<Tensor>& in) {
        return dp::sum_all(dp::mul(dp::embed_description(d, in[0]), dp::embed_description(d, in[0])));
      },
      {random_table(rng, 4)});
  EXPECT_LT(err, 1e-4);
}

TEST(Cosine, IdenticalVectorsGiveOne) {
  dp::Rng rng(45);
  const Tensor w = random_row(rng, 8);
  EXPECT_NEAR(dp::cosine_similarity(w, w).value(), 1.0, 1e-12);
}

TEST(Cosine, OrthogonalVectorsGiveZero) {
  const Tensor w = Tensor::from({{1.0, 0.0}});
  const Tensor v = Tensor::from({{0.0, 3.0}});
  EXPECT_EQ(dp::cosine_similarity(w, v).value(), 0.0);
}

TEST(Cosine, HandComputedValue) {
  const Tensor w = Tensor::from({{1.0, 0.0}});
  const Tensor v = Tensor::from({{1.0, 1.0}});
  EXPECT_NEAR(dp::cosine_similarity(w, v).value(), std::sqrt(2.0) / 2.0, 1e-12);
}

TEST(Cosine, ZeroNormIsAnError) {
  const Tensor w = Tensor::zeros(1, 3);
  const Tensor v = Tensor::from({{1.0, 0.0, 0.0}});
  EXPECT_THROW(dp::cosine_similarity(w, v), std::runtime_error);
}

TEST(Cosine, ScaleInvariantForPositiveScalings) {
  dp::Rng rng(46);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor w = random_row(rng, 6);
    const Tensor v = random_row(rng, 6);
    const double s = dp::cosine_similarity(w, v).value();
    EXPECT_GE(s, -1.0 - 1e-12);
    EXPECT_LE(s, 1.0 + 1e-12);
    const double a = rng.uniform(0.1, 10.0), b = rng.uniform(0.1, 10.0);
    EXPECT_NEAR(dp::cosine_similarity(dp::scale(w, a), dp::scale(v, b)).value(), s, 1e-12);
  }
}

TEST(Cosine, GradientMatchesFiniteDifferences) {
  dp::Rng rng(47);
  const double err = dp::grad_check(
      [](const std::vector<Tensor>& in) { return dp::cosine_similarity(in[0], in[1]); },
      {random_row(rng, 4), random_row(rng, 4)});
  EXPECT_LT(err, 1e-4);
}

TEST(ItmLoss, PerfectMatchIsNearZero) {
  dp::Rng rng(48);
  const Tensor w = random_row(rng, 5);
  const double loss = dp::itm_loss({{w, w, 1}}).value();
  EXPECT_NEAR(loss, 1e-6, 1e-8);  // -log(1 - eps)
}

TEST(ItmLoss, ZeroSimilarityGivesLogTwoForEitherLabel) {
  const Tensor w = Tensor::from({{1.0, 0.0}});
  const Tensor v = Tensor::from({{0.0, 1.0}});
  EXPECT_NEAR(dp::itm_loss({{w, v, 1}}).value(), std::log(2.0), 1e-15);
  EXPECT_NEAR(dp::itm_loss({{w, v, 0}}).value(), std::log(2.0), 1e-15);
}

TEST(ItmLoss, BatchIsMeanOfPairLosses) {
  dp::Rng rng(49);
  dp::PairBatch batch;
  double acc = 0.0;
  for (int i = 0; i < 5; ++i) {
    const Tensor w = random_row(rng, 4);
    const Tensor v = random_row(rng, 4);
    const int y = i % 2;
    batch.push_back({w, v, y});
    acc += dp::itm_loss({{w, v, y}}).value();
  }
  EXPECT_NEAR(dp::itm_loss(batch).value(), acc / 5.0, 1e-12);
}

TEST(ItmLoss, ZeroVectorsSitAtChanceLevel) {
  const Tensor z = Tensor::zeros(1, 4);
  EXPECT_NEAR(dp::itm_loss({{z, z, 1}}).value(), std::log(2.0), 1e-15);
}

TEST(ItmLoss, GradientThroughBothBranches) {
  dp::Rng rng(50);
  const Tensor w2 = random_row(rng, 4);
  const Tensor v2 = random_row(rng, 4);
  const double err = dp::grad_check(
      [&](const std::vector<Tensor>& in) {
        return dp::itm_loss({{in[0], in[1], 1}, {in[0], v2, 0}, {w2, in[1], 0}});
      },
      {random_row(rng, 4), random_row(rng, 4)});
  EXPECT_LT(err, 1e-4);
}

TEST(MakeNegatives, TwoPositivesSwap) {
  dp::Rng rng(51);
  const Tensor w0 = random_row(rng, 3), v0 = random_row(rng, 3);
  const Tensor w1 = random_row(rng, 3), v1 = random_row(rng, 3);
  const auto batch = dp::make_negatives({{w0, v0}, {w1, v1}}, 9);
  ASSERT_EQ(batch.size(), 4u);
  EXPECT_EQ(batch[0].label, 1);
  EXPECT_EQ(batch[1].label, 1);
  EXPECT_EQ(batch[2].label, 0);
  EXPECT_EQ(batch[3].label, 0);
  EXPECT_TRUE(batch[2].lang_feat.same_storage(v1));  // only derangement of 2 swaps
  EXPECT_TRUE(batch[3].lang_feat.same_storage(v0));
}

TEST(MakeNegatives, NoNegativeKeepsItsOwnLanguageFeature) {
  dp::Rng rng(52);
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 2 + static_cast<int>(rng.uniform_int(7));
    std::vector<std::pair<Tensor, Tensor>> positives;
    for (int i = 0; i < n; ++i) positives.emplace_back(random_row(rng, 3), random_row(rng, 3));
    const auto batch = dp::make_negatives(positives, seed);
    ASSERT_EQ(batch.size(), 2 * positives.size());
    for (size_t i = 0; i < positives.size(); ++i) {
      const auto& neg = batch[positives.size() + i];
      EXPECT_EQ(neg.label, 0);
      EXPECT_TRUE(neg.scene_feat.same_storage(positives[i].first));
      EXPECT_FALSE(neg.lang_feat.same_storage(positives[i].second));
    }
  }
}

TEST(MakeNegatives, FewerThanTwoPositivesThrows) {
  dp::Rng rng(53);
  EXPECT_THROW(dp::make_negatives({{random_row(rng, 2), random_row(rng, 2)}}, 0),
               dp::ShapeError);
}
