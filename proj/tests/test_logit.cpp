// Copyright 2026 The uqbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "test_helpers.hpp"
#include "uqbench/logit_est.hpp"

namespace uqbench {
namespace {

using testing::steps;

TEST(NllScores, AllZeroLogprobs) {
  auto s = logit::nll_scores(steps({0.0, 0.0, 0.0}));
  EXPECT_EQ(s.msp.value(), 0.0);
  EXPECT_EQ(s.ppl.value(), 0.0);
}

TEST(NllScores, HandEvaluated) {
  auto s = logit::nll_scores(steps({-1.0, -2.0, -3.0}));
  EXPECT_DOUBLE_EQ(s.msp.value(), 6.0);
  EXPECT_DOUBLE_EQ(s.ppl.value(), 2.0);
}

TEST(NllScores, SingleTokenPplEqualsMsp) {
  auto s = logit::nll_scores(steps({-0.6931}));
  EXPECT_EQ(s.msp.value(), s.ppl.value());
  EXPECT_NEAR(s.msp.value(), 0.6931, 1e-12);
}

TEST(NllScores, EmptyThrows) {
  EXPECT_THROW(logit::nll_scores({}), DataError);
}

TEST(MeanTokenEntropy, Examples) {
  auto st = steps({-0.1, -0.2});
  st[0].entropy = 0.5;
  st[1].entropy = 1.5;
  EXPECT_DOUBLE_EQ(logit::mean_token_entropy(st).value(), 1.0);
  st[0].entropy = std::log(4.0);
  st[1].entropy = std::log(4.0);
  EXPECT_NEAR(logit::mean_token_entropy(st).value(), 1.3863, 1e-4);
  st[1].entropy.reset();
  EXPECT_FALSE(logit::mean_token_entropy(st).has_value());
}

std::vector<DistEntry> dist(std::initializer_list<double> probs) {
  std::vector<DistEntry> d;
  std::int64_t id = 0;
  for (double p : probs) d.push_back({id++, p});
  return d;
}

TEST(UniformDivergence, UniformIsZero) {
  auto st = steps({-std::log(4.0), -std::log(4.0)});
  for (auto& s : st) s.dist = dist({0.25, 0.25, 0.25, 0.25});
  EXPECT_NEAR(logit::uniform_divergence(st, logit::UniformMode::kFisherRao).value(), 0.0, 1e-7);
  EXPECT_NEAR(logit::uniform_divergence(st, logit::UniformMode::kSelfCertainty).value(), 0.0, 1e-15);
  EXPECT_NEAR(logit::uniform_divergence(st, logit::UniformMode::kRenyi).value(), 0.0, 1e-12);
}

TEST(UniformDivergence, FisherRaoOneHotTwoTokens) {
  auto st = steps({0.0});
  st[0].dist = dist({1.0, 0.0});
  // arccos(sqrt(1/2)) = pi/4, scaled by 2/pi and negated.
  EXPECT_NEAR(logit::uniform_divergence(st, logit::UniformMode::kFisherRao).value(), -0.5, 1e-12);
}

TEST(UniformDivergence, SelfCertaintyClampsZeros) {
  auto st = steps({0.0});
  st[0].dist = dist({1.0, 0.0});
  auto v = logit::uniform_divergence(st, logit::UniformMode::kSelfCertainty);
  ASSERT_TRUE(v.has_value());
  EXPECT_TRUE(std::isfinite(v.value()));
  EXPECT_LT(v.value(), 0.0);
}

TEST(UniformDivergence, MissingDist) {
  auto st = steps({-1.0});
  EXPECT_FALSE(logit::uniform_divergence(st, logit::UniformMode::kRenyi).has_value());
  st[0].dist = std::vector<DistEntry>{};
  EXPECT_FALSE(logit::uniform_divergence(st, logit::UniformMode::kRenyi).has_value());
}

TEST(Pmi, Examples) {
  auto st = steps({-1.0, -1.0});
  for (auto& s : st) s.logprob_uncond = s.logprob_cond;
  EXPECT_EQ(logit::pmi_scores(st, logit::PmiMode::kPmi).value(), 0.0);
  for (auto& s : st) s.logprob_uncond = -2.0;
  EXPECT_DOUBLE_EQ(logit::pmi_scores(st, logit::PmiMode::kPmi).value(), -1.0);
}

TEST(Pmi, ClosedGateEqualsPpl) {
  auto st = steps({-0.3, -1.7, -0.05});
  for (auto& s : st) {
    s.logprob_uncond = -4.0;
    s.entropy = 0.01;
  }
  EXPECT_EQ(logit::pmi_scores(st, logit::PmiMode::kCpmi).value(),
            logit::nll_scores(st).ppl.value());
}

TEST(Pmi, MissingUncond) {
  EXPECT_FALSE(logit::pmi_scores(steps({-1.0}), logit::PmiMode::kPmi).has_value());
}

TEST(TokenSar, EqualSimsEqualPpl) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TokenStep> st(1 + trial % 17);
    const double sim = u(rng);
    for (auto& s : st) {
      s.logprob_cond = -5.0 * u(rng);
      s.loo_similarity = sim;
    }
    EXPECT_EQ(logit::token_sar(st).value(), logit::nll_scores(st).ppl.value());
  }
}

TEST(TokenSar, HandEvaluated) {
  auto st = steps({-1.0, -2.0});
  st[0].loo_similarity = 0.9;
  st[1].loo_similarity = 0.5;
  EXPECT_NEAR(logit::token_sar(st).value(), (0.1 * 1 + 0.5 * 2) / 0.6, 1e-12);
}

TEST(TokenSar, AllWeightOnOneToken) {
  auto st = steps({-1.0, -2.0, -3.0});
  st[0].loo_similarity = 1.0;
  st[1].loo_similarity = 0.0;
  st[2].loo_similarity = 1.0;
  EXPECT_DOUBLE_EQ(logit::token_sar(st).value(), 2.0);
}

TEST(TokenSar, AllSimsOneIsMissing) {
  auto st = steps({-1.0, -2.0});
  for (auto& s : st) s.loo_similarity = 1.0;
  EXPECT_FALSE(logit::token_sar(st).has_value());
}

std::vector<AlternativeToken> alts(std::initializer_list<std::pair<double, NliLabel>> xs) {
  std::vector<AlternativeToken> out;
  std::int64_t id = 0;
  for (auto [p, l] : xs) out.push_back({id++, p, l});
  return out;
}

TEST(Ccp, AllEntail) {
  auto st = steps({-0.5, -0.5});
  for (auto& s : st) s.alternatives = alts({{0.6, NliLabel::kEntail}, {0.4, NliLabel::kEntail}});
  EXPECT_EQ(logit::ccp(st).value(), -1.0);
}

TEST(Ccp, MixedMass) {
  auto st = steps({-0.5});
  st[0].alternatives = alts({{0.6, NliLabel::kEntail},
                             {0.2, NliLabel::kContra},
                             {0.2, NliLabel::kNeutral}});
  EXPECT_NEAR(logit::ccp(st).value(), -0.75, 1e-12);
}

TEST(Ccp, SmallEntailMassPullsTowardZero) {
  auto st = steps({-0.5, -0.5});
  st[0].alternatives = alts({{1.0, NliLabel::kEntail}});
  st[1].alternatives = alts({{1e-6, NliLabel::kEntail}, {1.0 - 1e-6, NliLabel::kContra}});
  EXPECT_NEAR(logit::ccp(st).value(), -1e-6, 1e-12);
}

TEST(PTrue, Examples) {
  ReflexiveRecord r;
  r.p_true = 1.0;
  r.p_true_sampling = 0.5;
  EXPECT_EQ(logit::ptrue_nll(r, logit::PTrueVariant::kPTrue).value(), 0.0);
  EXPECT_NEAR(logit::ptrue_nll(r, logit::PTrueVariant::kPTrueSampling).value(), 0.6931, 1e-4);
  EXPECT_FALSE(logit::ptrue_nll(std::nullopt, logit::PTrueVariant::kPTrue).has_value());
  r.p_true = 0.0;
  EXPECT_NEAR(logit::ptrue_nll(r, logit::PTrueVariant::kPTrue).value(), -std::log(kProbFloor), 1e-9);
}

}  // namespace
}  // namespace uqbench
