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
#include <random>

#include "test_helpers.hpp"
#include "uqbench/internal_est.hpp"
#include "uqbench/logit_est.hpp"

namespace uqbench {
namespace {

using testing::steps;

internal::AttentionExtract diag_extract(const Eigen::MatrixXd& diag) {
  internal::AttentionExtract ex;
  ex.layers = 1;
  ex.heads = static_cast<int>(diag.rows());
  ex.middle_layer_diag = diag;
  return ex;
}

TEST(AttentionScore, Examples) {
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 3);
  EXPECT_NEAR(internal::attention_score(diag_extract(ones)).value(), -3 * std::log1p(1e-12), 1e-15);
  Eigen::MatrixXd d{{0.5, 0.25}};
  EXPECT_NEAR(internal::attention_score(diag_extract(d)).value(), 2.0794, 1e-4);
  Eigen::MatrixXd z{{0.0}};
  EXPECT_NEAR(internal::attention_score(diag_extract(z)).value(), -std::log(1e-12), 1e-9);
}

internal::AttentionExtract prev_extract(std::initializer_list<Eigen::MatrixXd> layers) {
  internal::AttentionExtract ex;
  int l = 0;
  for (const auto& m : layers) ex.prev_attn.emplace(l++, m);
  return ex;
}

TEST(Rauq, Examples) {
  auto st = steps({0.0, 0.0, 0.0});
  auto ex = prev_extract({Eigen::MatrixXd::Ones(1, 3)});
  EXPECT_DOUBLE_EQ(internal::rauq(st, ex, 0.5).value(), 1.0);

  auto half = steps({std::log(0.5), std::log(0.5)});
  auto ex2 = prev_extract({Eigen::MatrixXd::Ones(1, 2)});
  EXPECT_NEAR(internal::rauq(half, ex2, 0.5).value(), 1.0 + std::log(2.0), 1e-12);

  auto twin = prev_extract({Eigen::MatrixXd::Ones(1, 2), Eigen::MatrixXd::Ones(1, 2)});
  EXPECT_EQ(internal::rauq(half, twin, 0.5).value(), internal::rauq(half, ex2, 0.5).value());
}

TEST(Rauq, SingleToken) {
  auto st = steps({-0.4});
  auto ex = prev_extract({Eigen::MatrixXd::Constant(2, 1, 0.3), Eigen::MatrixXd::Constant(2, 1, 0.9)});
  EXPECT_NEAR(internal::rauq(st, ex, 0.5).value(), 1.4, 1e-12);
}

TEST(Rauq, PicksWorstLayer) {
  auto st = steps({std::log(0.9), std::log(0.2), std::log(0.3)});
  Eigen::MatrixXd strong = Eigen::MatrixXd::Constant(1, 3, 0.9);
  Eigen::MatrixXd weak = Eigen::MatrixXd::Constant(1, 3, 0.1);
  auto both = prev_extract({strong, weak});
  const double a = internal::rauq(st, prev_extract({strong}), 0.5).value();
  const double b = internal::rauq(st, prev_extract({weak}), 0.5).value();
  EXPECT_EQ(internal::rauq(st, both, 0.5).value(), std::max(a, b));
}

internal::AttentionExtract from_last(std::initializer_list<double> w) {
  internal::AttentionExtract ex;
  ex.from_last = Eigen::VectorXd(static_cast<Eigen::Index>(w.size()));
  Eigen::Index i = 0;
  for (double x : w) ex.from_last(i++) = x;
  return ex;
}

TEST(Csl, Examples) {
  auto st = steps({-1.0, -2.0});
  EXPECT_NEAR(internal::csl(st, from_last({1.0, 3.0})).value(), 1.75, 1e-12);
  EXPECT_DOUBLE_EQ(internal::csl(st, from_last({0.0, 0.4})).value(), 2.0);
  EXPECT_FALSE(internal::csl(st, from_last({0.0, 0.0})).has_value());
}

TEST(Csl, UniformSaliencyEqualsPplExactly) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TokenStep> st(1 + trial % 23);
    for (auto& s : st) s.logprob_cond = -6.0 * u(rng);
    internal::AttentionExtract ex;
    ex.from_last = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(st.size()), u(rng) + 1e-3);
    EXPECT_EQ(internal::csl(st, ex).value(), logit::nll_scores(st).ppl.value());
  }
}

TEST(ExtractAttention, FromTrace) {
  auto t = testing::full_trace(2);
  auto ex = internal::extract_attention(t);
  ASSERT_TRUE(ex.has_value());
  EXPECT_EQ(ex->middle_layer_diag.cols(), static_cast<Eigen::Index>(t.response.size()));
  EXPECT_EQ(ex->middle_layer_diag.rows(), t.attention->heads);
  EXPECT_FALSE(ex->prev_attn.empty());
  strip_capability(t, Capability::kAttention);
  EXPECT_FALSE(internal::extract_attention(t).has_value());
}

TEST(MiddleLayers, Indexing) {
  EXPECT_EQ(internal::middle_layer(6), 3);
  EXPECT_EQ(internal::middle_layer(1), 0);
  auto third = internal::middle_third(6);
  EXPECT_EQ(third.front(), 2);
  EXPECT_GE(third.back(), third.front());
}

TEST(EigenScore, AllZero) {
  internal::EmbeddingSet e{Eigen::MatrixXd::Zero(5, 4)};
  EXPECT_NEAR(internal::eigenscore(e, 1e-3).value(), std::log(1e-3), 1e-12);
}

TEST(EigenScore, IdenticalColumns) {
  Eigen::VectorXd v(3);
  v << 1.0, 2.0, 4.0;
  internal::EmbeddingSet e{Eigen::MatrixXd(3, 2)};
  e.matrix.col(0) = v;
  e.matrix.col(1) = v;
  const Eigen::VectorXd centered = v.array() - v.mean();
  const double c = centered.squaredNorm();
  const double reg = 1e-3;
  EXPECT_NEAR(internal::eigenscore(e, reg).value(), 0.5 * (std::log(2 * c + reg) + std::log(reg)),
              1e-12);
}

TEST(EigenScore, OrthogonalCenteredColumns) {
  Eigen::MatrixXd m(4, 2);
  m << 1, 1, -1, 1, 1, -1, -1, -1;
  internal::EmbeddingSet e{m};
  EXPECT_NEAR(internal::eigenscore(e, 1e-3).value(), std::log(4.0 + 1e-3), 1e-12);
}

TEST(EigenScore, NonFiniteThrows) {
  internal::EmbeddingSet e{Eigen::MatrixXd::Zero(2, 2)};
  e.matrix(0, 0) = std::nan("");
  EXPECT_THROW(internal::eigenscore(e), DataError);
}

}  // namespace
}  // namespace uqbench
