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

#include <sstream>
#include <string>

#include "test_helpers.hpp"
#include "uqbench/trace.hpp"
#include "uqbench/trace_io.hpp"

namespace uqbench {
namespace {

std::string record(const std::string& id, const std::string& split, double logprob = -0.5,
                   const std::string& version = "1.0") {
  return R"({"schema_version":")" + version + R"(","instance_id":")" + id + R"(","split":")" + split +
         R"(","quality":{"value":1,"kind":"binary"},"response":[{"logprob_cond":)" + std::to_string(logprob) +
         "}]}";
}

TEST(LoadTraces, EmptyInputGivesEmptyCorpus) {
  std::istringstream in("");
  const auto c = parse_traces(in);
  EXPECT_TRUE(c.traces.empty());
  EXPECT_EQ(c.n_train, 0u);
  EXPECT_EQ(c.n_eval, 0u);
}

TEST(LoadTraces, PositiveLogprobNamesField) {
  std::istringstream in(record("a", "eval", 0.1) + "\n");
  try {
    parse_traces(in, kSchemaVersion, "f.jsonl");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("f.jsonl:1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("logprob_cond"), std::string::npos) << msg;
  }
}

TEST(LoadTraces, SplitCountsOnThreeRecordFixture) {
  std::istringstream in(record("a", "eval") + "\n" + record("b", "train") + "\n\n" + record("c", "eval") + "\n");
  const auto c = parse_traces(in);
  ASSERT_EQ(c.traces.size(), 3u);
  EXPECT_EQ(c.n_train, 1u);
  EXPECT_EQ(c.n_eval, 2u);
  EXPECT_EQ(c.traces[0].instance_id, "a");
  EXPECT_EQ(c.traces[2].instance_id, "c");
}

TEST(LoadTraces, MalformedLineReportsLineNumber) {
  std::istringstream in(record("a", "eval") + "\n{not json\n");
  try {
    parse_traces(in, kSchemaVersion, "x");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("x:2"), std::string::npos) << e.what();
  }
}

TEST(LoadTraces, VersionMismatchRejected) {
  std::istringstream in(record("a", "eval", -0.5, "0.9") + "\n");
  EXPECT_THROW(parse_traces(in), DataError);
}

TEST(LoadTraces, UnknownFieldRejected) {
  std::string r = record("a", "eval");
  r.insert(1, R"("bogus":1,)");
  std::istringstream in(r);
  EXPECT_THROW(parse_traces(in), DataError);
}

TEST(LoadTraces, DuplicateInstanceAcrossSplitsRejected) {
  std::istringstream in(record("a", "eval") + "\n" + record("a", "train") + "\n");
  EXPECT_THROW(parse_traces(in), DataError);
}

TEST(LoadTraces, RoundTripIsByteStable) {
  std::vector<GenerationTrace> traces;
  for (std::size_t i = 0; i < 5; ++i) traces.push_back(testing::full_trace(i));
  const std::string once = serialize_traces(traces);
  std::istringstream in(once);
  const auto back = parse_traces(in);
  EXPECT_EQ(serialize_traces(back.traces), once);
}

TEST(LoadTraces, GzipRoundTrip) {
  const auto dir = testing::scratch_dir("gz");
  std::vector<GenerationTrace> traces{testing::full_trace(0), testing::full_trace(1)};
  const auto path = (dir / "t.jsonl.gz").string();
  write_traces(path, traces);
  const auto c = load_traces(path);
  EXPECT_EQ(serialize_traces(c.traces), serialize_traces(traces));
}

TEST(LoadTraces, MissingFileIsDataError) {
  EXPECT_THROW(load_traces("/nonexistent/traces.jsonl"), DataError);
}

TEST(Require, LackingSamples) {
  auto t = testing::full_trace();
  t.samples.clear();
  EXPECT_FALSE(require(t, Capability::kSamples));
}

TEST(Require, FullTraceHasEveryCapability) {
  const auto t = testing::full_trace();
  for (const auto& [cap, name] : kCapabilityNames) EXPECT_TRUE(require(t, cap)) << name;
  EXPECT_TRUE(require(t, "relations"));
}

TEST(Require, EmptyAlternativesUnavailable) {
  auto t = testing::full_trace();
  t.response[0].alternatives->clear();
  EXPECT_FALSE(require(t, Capability::kAlternatives));
}

TEST(Require, UnknownTagIsConfigError) { EXPECT_THROW(require(testing::full_trace(), "logitz"), ConfigError); }

TEST(Require, StripRemovesCapability) {
  for (const auto& [cap, name] : kCapabilityNames) {
    auto t = testing::full_trace();
    strip_capability(t, cap);
    EXPECT_FALSE(require(t, cap)) << name;
  }
}

TEST(Validate, RejectsBadInvariants) {
  auto t = testing::full_trace();
  validate(t);
  auto bad = t;
  bad.quality = {0.5, QualityKind::kBinary};
  EXPECT_THROW(validate(bad), DataError);
  bad = t;
  (*bad.relations->sample_sim)(0, 0) = 0.5;
  EXPECT_THROW(validate(bad), DataError);
  bad = t;
  bad.samples[0].token_logprobs.pop_back();
  EXPECT_THROW(validate(bad), DataError);
  bad = t;
  bad.response.clear();
  EXPECT_THROW(validate(bad), DataError);
  bad = t;
  bad.reflexive->p_true = 0.0;
  EXPECT_THROW(validate(bad), DataError);
  bad = t;
  bad.samples[1].embedding->push_back(1.0);
  EXPECT_THROW(validate(bad), DataError);
}

}  // namespace
}  // namespace uqbench
