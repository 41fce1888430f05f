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

#include <map>
#include <set>
#include <sstream>

#include "test_helpers.hpp"
#include "uqbench/registry.hpp"
#include "uqbench/score_table.hpp"
#include "uqbench/synth.hpp"

namespace uqbench {
namespace {

TEST(Catalog, FortySixEstimatorsInEnumOrder) {
  const auto& cat = catalog();
  ASSERT_EQ(cat.size(), 46u);
  ASSERT_EQ(kNumEstimators, 46u);
  std::set<std::string_view> ids;
  for (std::size_t i = 0; i < cat.size(); ++i) {
    EXPECT_EQ(static_cast<std::size_t>(cat[i].est), i);
    EXPECT_TRUE(ids.insert(cat[i].id).second) << cat[i].id;
    EXPECT_EQ(parse_estimator(cat[i].id), cat[i].est);
  }
}

TEST(Catalog, FamilySizes) {
  std::map<Family, int> n;
  for (const auto& e : catalog()) ++n[e.family];
  EXPECT_EQ(n[Family::kInformation], 10);
  EXPECT_EQ(n[Family::kSample], 9);
  EXPECT_EQ(n[Family::kInternal], 4);
  EXPECT_EQ(n[Family::kTraining], 5);
  EXPECT_EQ(n[Family::kReflexive], 3);
  EXPECT_EQ(n[Family::kBlackbox], 15);
  for (const auto& e : catalog()) EXPECT_EQ(e.trained, e.family == Family::kTraining) << e.id;
}

TEST(Catalog, UnknownIdListsValidIds) {
  try {
    parse_estimator("Perplexity");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("Perplexity"), std::string::npos);
    EXPECT_NE(msg.find("PPL"), std::string::npos);
    EXPECT_NE(msg.find("LexSim-BLEU"), std::string::npos);
  }
}

class RegistryFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SynthParams p;
    p.n = 40;
    p.seed = 5;
    p.signal = 0.6;
    p.hallucination_rate = 0.4;
    auto train = synth_traces(p);
    p.seed = 6;
    auto bg = synth_traces(p);
    models_ = new TrainingModels(fit_training(train, bg, EstimatorConfig{}));
  }
  static void TearDownTestSuite() {
    delete models_;
    models_ = nullptr;
  }
  static TrainingModels* models_;
};
TrainingModels* RegistryFixture::models_ = nullptr;

TEST_F(RegistryFixture, FullTraceScoresEveryEstimator) {
  const auto est = all_estimators();
  for (std::size_t i = 0; i < 5; ++i) {
    auto t = testing::full_trace(i);
    auto v = score_trace(t, est, EstimatorConfig{}, models_);
    for (std::size_t k = 0; k < est.size(); ++k)
      EXPECT_TRUE(v[k].has_value()) << info(est[k]).id << " on trace " << i;
  }
}

TEST_F(RegistryFixture, TrainedEstimatorsAbstainWithoutModels) {
  auto t = testing::full_trace(0);
  for (const auto& e : catalog()) {
    auto v = score_one(t, e.est, EstimatorConfig{}, nullptr);
    EXPECT_EQ(v.has_value(), !e.trained) << e.id;
  }
}

// Each estimator must abstain when a declared input is removed and must be
// unaffected when any other capability is removed.
TEST_F(RegistryFixture, CapabilityAudit) {
  const EstimatorConfig cfg;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto base = testing::full_trace(i);
    for (const auto& e : catalog()) {
      const auto want = score_one(base, e.est, cfg, models_);
      ASSERT_TRUE(want.has_value()) << e.id;
      for (const auto& [cap, name] : kCapabilityNames) {
        auto t = base;
        strip_capability(t, cap);
        const auto got = score_one(t, e.est, cfg, models_);
        const bool declared = std::find(e.needs.begin(), e.needs.end(), cap) != e.needs.end();
        if (declared)
          EXPECT_FALSE(got.has_value()) << e.id << " without " << name;
        else
          EXPECT_EQ(got, want) << e.id << " without " << name;
      }
    }
  }
}

TEST_F(RegistryFixture, ModelsJsonRoundTrip) {
  const auto restored = training_models_from_json(to_json(*models_));
  auto t = testing::full_trace(3);
  for (const auto& e : catalog()) {
    if (!e.trained) continue;
    EXPECT_EQ(score_one(t, e.est, EstimatorConfig{}, models_),
              score_one(t, e.est, EstimatorConfig{}, &restored))
        << e.id;
  }
}

TEST(Registry, IdentitiesOnRandomTraces) {
  SynthParams p;
  p.n = 200;
  p.seed = 99;
  const auto traces = synth_traces(p);
  EstimatorConfig cpmi0;
  cpmi0.cpmi_lambda = 0.0;
  for (auto t : traces) {
    const auto msp = score_one(t, Est::kMsp, cpmi0, nullptr).value();
    const auto ppl = score_one(t, Est::kPpl, cpmi0, nullptr).value();
    EXPECT_EQ(ppl, msp / static_cast<double>(t.response.size()));
    EXPECT_EQ(score_one(t, Est::kCpmi, cpmi0, nullptr).value(), ppl);
    for (auto& s : t.response) {
      s.loo_similarity = 0.25;
      s.attn_from_last = 0.125;
      s.logprob_uncond = s.logprob_cond;
    }
    EXPECT_EQ(score_one(t, Est::kTokenSar, cpmi0, nullptr).value(), ppl);
    EXPECT_EQ(score_one(t, Est::kCsl, cpmi0, nullptr).value(), ppl);
    EXPECT_EQ(score_one(t, Est::kPmi, cpmi0, nullptr).value(), 0.0);
    t.relations->sent_sim->setOnes();
    EXPECT_EQ(score_one(t, Est::kCocoaMsp, cpmi0, nullptr).value(), 0.0);
    EXPECT_EQ(score_one(t, Est::kCocoaPpl, cpmi0, nullptr).value(), 0.0);
    EXPECT_EQ(score_one(t, Est::kCocoaMte, cpmi0, nullptr).value(), 0.0);
  }
}

TEST(ScoreTableCsv, RoundTripWithMissing) {
  ScoreTable t;
  t.instances = {"a", "b", "c"};
  t.estimators = {"MSP", "KLE"};
  t.families = {Family::kInformation, Family::kBlackbox};
  t.values = {{0.1, 1.0 / 3.0, kMissing}, {-0.0, 1e-300, 12345.678}};
  const std::string csv = to_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "estimator,family,a,b,c");
  EXPECT_NE(csv.find("NA"), std::string::npos);
  std::istringstream in(csv);
  const auto back = read_csv(in);
  EXPECT_EQ(back.instances, t.instances);
  EXPECT_EQ(back.estimators, t.estimators);
  EXPECT_EQ(back.families, t.families);
  EXPECT_TRUE(std::isnan(back.values[0][2]));
  EXPECT_EQ(back.values[0][1], t.values[0][1]);
  EXPECT_EQ(back.values[1][1], t.values[1][1]);
  EXPECT_EQ(to_csv(back), csv);
}

TEST(ScoreTableCsv, Errors) {
  std::istringstream ragged("estimator,family,a,b\nMSP,information,1\n");
  EXPECT_THROW(read_csv(ragged), DataError);
  std::istringstream fam("estimator,family,a\nMSP,nonsense,1\n");
  EXPECT_THROW(read_csv(fam), DataError);
  std::istringstream num("estimator,family,a\nMSP,information,abc\n");
  EXPECT_THROW(read_csv(num), DataError);
  ScoreTable bad;
  bad.instances = {"a,b"};
  bad.estimators = {"MSP"};
  bad.families = {Family::kInformation};
  bad.values = {{1.0}};
  EXPECT_THROW(to_csv(bad), DataError);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_value(kMissing), "NA");
  const double x = 1.0 / 7.0;
  EXPECT_EQ(parse_double(format_double(x), "t"), x);
}

}  // namespace
}  // namespace uqbench
