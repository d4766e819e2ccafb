#include <cmath>

#include <gtest/gtest.h>

#include "dp/itg.hpp"

using dp::Description;
using dp::Tensor;
namespace tok = dp::tok;

namespace {

dp::ItgParams random_itg(dp::ParamRegistry& reg, int d, uint64_t seed) {
  auto p = dp::make_itg(reg, d);
  dp::Rng rng(seed);
  for (auto& [name, t] : reg.items()) {
    Tensor tt = t;
    for (size_t i = 0; i < tt.size(); ++i) tt.data()[i] = 0.25 * rng.normal();
  }
  return p;
}

Tensor random_cond(dp::Rng& rng, int rows, int d) {
  Tensor t(rows, d);
  for (size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.normal();
  return t;
}

const Description kClause{tok::BOS, tok::CAR, tok::AHEAD, tok::NEAR, tok::APPROACHING, tok::EOS};

}  // namespace

TEST(StepLogits, VocabWidthAndFiniteness) {
  dp::ParamRegistry reg;
  const auto p = random_itg(reg, 8, 61);
  dp::Rng rng(62);
  const Tensor cond = random_cond(rng, 3, 8);
  const std::vector<bool> mask{true, true, false};
  for (const Description& prefix :
       {Description{tok::BOS}, Description{tok::BOS, tok::NONE},
        Description{tok::BOS, tok::CAR, tok::AHEAD}}) {
    const Tensor logits = dp::step_logits(prefix, cond, &mask, p);
    EXPECT_EQ(logits.rows(), 1);
    EXPECT_EQ(logits.cols(), dp::kVocabSize);
    EXPECT_TRUE(logits.all_finite());
  }
}

TEST(StepLogits, ZeroParamsGiveZeroLogits) {
  dp::ParamRegistry reg;
  const auto p = dp::make_itg(reg, 8);
  dp::Rng rng(63);
  const Tensor cond = random_cond(rng, 2, 8);
  const std::vector<bool> mask{true, true};
  const Tensor logits = dp::step_logits({tok::BOS, tok::NONE}, cond, &mask, p);
  for (size_t i = 0; i < logits.size(); ++i) EXPECT_EQ(logits.data()[i], 0.0);
}

TEST(StepLogits, BadPrefixesThrow) {
  dp::ParamRegistry reg;
  const auto p = random_itg(reg, 4, 64);
  const Tensor cond;
  EXPECT_THROW(dp::step_logits({}, cond, nullptr, p), dp::DataError);
  EXPECT_THROW(dp::step_logits({tok::CAR}, cond, nullptr, p), dp::DataError);
  Description too_long(static_cast<size_t>(dp::kMaxDescLen) + 1, tok::NONE);
  too_long[0] = tok::BOS;
  EXPECT_THROW(dp::step_logits(too_long, cond, nullptr, p), dp::DataError);
}

TEST(ItgLoss, UniformModelGivesLogVocab) {
  dp::ParamRegistry reg;
  const auto p = dp::make_itg(reg, 8);  // all zero -> uniform next-token distribution
  dp::Rng rng(65);
  const Tensor cond = random_cond(rng, 4, 8);
  const std::vector<bool> mask{true, true, true, false};
  for (const Description& d : {kClause, Description{tok::BOS, tok::NONE, tok::EOS}}) {
    EXPECT_NEAR(dp::itg_loss(d, cond, &mask, p).value(), std::log(18.0), 1e-9);
  }
}

TEST(ItgLoss, NonNegativeOnRandomModels) {
  dp::ParamRegistry reg;
  const auto p = random_itg(reg, 8, 66);
  dp::Rng rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor cond = random_cond(rng, 3, 8);
    const std::vector<bool> mask{true, true, true};
    EXPECT_GE(dp::itg_loss(kClause, cond, &mask, p).value(), 0.0);
  }
}

TEST(ItgLoss, InvalidDescriptionThrows) {
  dp::ParamRegistry reg;
  const auto p = random_itg(reg, 4, 68);
  const Tensor cond;
  EXPECT_THROW(dp::itg_loss({tok::BOS, tok::CAR, tok::EOS}, cond, nullptr, p), dp::DataError);
}

TEST(ItgLoss, GradientsOverAllParams) {
  dp::ParamRegistry reg;
  auto p = random_itg(reg, 4, 69);
  dp::Rng rng(70);
  const Tensor cond = random_cond(rng, 2, 4);
  const std::vector<bool> mask{true, true};
  const double err = dp::grad_check(
      [&](const std::vector<Tensor>& in) {
        dp::ItgParams q;
        q.embed = in[0];
        q.pos = in[1];
        q.self_wq = in[2];
        q.self_wk = in[3];
        q.self_wv = in[4];
        q.cross_wq = in[5];
        q.cross_wk = in[6];
        q.cross_wv = in[7];
        q.out = in[8];
        return dp::itg_loss(kClause, cond, &mask, q);
      },
      {p.embed, p.pos, p.self_wq, p.self_wk, p.self_wv, p.cross_wq, p.cross_wk, p.cross_wv,
       p.out});
  EXPECT_LT(err, 1e-4);
}

TEST(Causality, StepLogitsMatchFullPassExactly) {
  dp::ParamRegistry reg;
  const auto p = random_itg(reg, 8, 71);
  dp::Rng rng(72);
  const Tensor cond = random_cond(rng, 4, 8);
  const std::vector<bool> mask{true, false, true, true};
  const std::vector<int> inputs(kClause.begin(), kClause.end() - 1);
  const Tensor full = dp::itg_detail::decoder_logits(inputs, cond, &mask, p);
  for (size_t len = 1; len <= inputs.size(); ++len) {
    const std::vector<int> prefix(inputs.begin(), inputs.begin() + static_cast<long>(len));
    const Tensor step = dp::step_logits(prefix, cond, &mask, p);
    for (int j = 0; j < dp::kVocabSize; ++j)
      ASSERT_EQ(step.at(0, j), full.at(static_cast<int>(len) - 1, j)) << "len " << len;
  }
}

TEST(Causality, LaterTokensDoNotAffectEarlierLogits) {
  dp::ParamRegistry reg;
  const auto p = random_itg(reg, 8, 73);
  dp::Rng rng(74);
  const Tensor cond = random_cond(rng, 2, 8);
  const std::vector<bool> mask{true, true};
  std::vector<int> a{tok::BOS, tok::CAR, tok::AHEAD, tok::NEAR};
  std::vector<int> b{tok::BOS, tok::CAR, tok::FAR, tok::STATIC};  // differs after position 1
  const Tensor la = dp::itg_detail::decoder_logits(a, cond, &mask, p);
  const Tensor lb = dp::itg_detail::decoder_logits(b, cond, &mask, p);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < dp::kVocabSize; ++j) ASSERT_EQ(la.at(i, j), lb.at(i, j));
}

TEST(GreedyDecode, TerminatesWithFraming) {
  dp::ParamRegistry reg;
  const auto p = random_itg(reg, 8, 75);
  dp::Rng rng(76);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor cond = random_cond(rng, 3, 8);
    const std::vector<bool> mask{true, true, true};
    const Description d = dp::greedy_decode(cond, &mask, p);
    EXPECT_LE(d.size(), static_cast<size_t>(dp::kMaxDescLen) + 1);
    EXPECT_EQ(d.front(), tok::BOS);
    EXPECT_EQ(d.back(), tok::EOS);
  }
}

TEST(GreedyDecode, UnconditionedModelStillDecodes) {
  dp::ParamRegistry reg;
  const auto p = random_itg(reg, 8, 77);
  const Tensor no_cond;
  const Description d = dp::greedy_decode(no_cond, nullptr, p);
  EXPECT_EQ(d.front(), tok::BOS);
  EXPECT_EQ(d.back(), tok::EOS);
}
