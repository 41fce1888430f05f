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

#ifndef UQBENCH_TESTS_TEST_HELPERS_HPP_
#define UQBENCH_TESTS_TEST_HELPERS_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "uqbench/synth.hpp"
#include "uqbench/trace.hpp"

namespace uqbench::testing {

/// A trace with every capability populated.
inline GenerationTrace full_trace(std::size_t i = 0, std::uint64_t seed = 7) {
  SynthParams p;
  p.seed = seed;
  p.signal = 0.5;
  p.hallucination_rate = 0.5;
  return synth_instance(p, i);
}

inline TokenStep step(double logprob) {
  TokenStep s;
  s.logprob_cond = logprob;
  return s;
}

inline std::vector<TokenStep> steps(std::initializer_list<double> logprobs) {
  std::vector<TokenStep> out;
  for (double lp : logprobs) out.push_back(step(lp));
  return out;
}

inline SampleRecord sample(std::string text, std::vector<double> logprobs) {
  SampleRecord s;
  s.text = std::move(text);
  for (std::size_t k = 0; k < logprobs.size(); ++k) s.tokens.push_back(static_cast<std::int64_t>(k));
  s.token_logprobs = std::move(logprobs);
  return s;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("uqbench_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> n;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = n(rng);
  return m;
}

}  // namespace uqbench::testing

#endif  // UQBENCH_TESTS_TEST_HELPERS_HPP_
