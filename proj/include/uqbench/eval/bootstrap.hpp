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

#ifndef UQBENCH_EVAL_BOOTSTRAP_HPP_
#define UQBENCH_EVAL_BOOTSTRAP_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "uqbench/common.hpp"
#include "uqbench/parallel.hpp"

namespace uqbench::eval {

struct BootstrapResult {
  ScoreValue point;
  double stddev = 0.0;      // sample standard deviation over valid replicates
  std::size_t valid = 0;    // replicates on which the metric was defined
  std::size_t discarded = 0;
};

/// Generator for replicate `replicate` of a run seeded with `seed`. Each
/// replicate owns its stream, so results do not depend on scheduling.
inline std::mt19937_64 replicate_rng(std::uint64_t seed, std::size_t replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(replicate) >> 32)};
  return std::mt19937_64(seq);
}

/// Resampled instance indices for every replicate. With `groups` set,
/// whole groups are drawn with replacement (query-level resampling).
class ResamplePlan {
 public:
  ResamplePlan(std::size_t n, std::size_t replicates, std::uint64_t seed,
               const std::vector<std::string>* groups = nullptr, unsigned threads = 1)
      : indices_(replicates) {
    std::vector<std::vector<std::size_t>> members;
    if (groups) {
      if (groups->size() != n) throw DataError("bootstrap: group vector length mismatch");
      std::map<std::string, std::size_t> slot;
      for (std::size_t i = 0; i < n; ++i) {
        auto [it, fresh] = slot.emplace((*groups)[i], members.size());
        if (fresh) members.emplace_back();
        members[it->second].push_back(i);
      }
    }
    parallel_for(replicates, threads, [&](std::size_t r) {
      auto rng = replicate_rng(seed, r);
      auto& idx = indices_[r];
      if (members.empty()) {
        if (n == 0) return;
        idx.resize(n);
        for (auto& v : idx) v = uniform_index(rng, n);
      } else {
        for (std::size_t g = 0; g < members.size(); ++g) {
          const auto& m = members[uniform_index(rng, members.size())];
          idx.insert(idx.end(), m.begin(), m.end());
        }
      }
    });
  }

  std::size_t replicates() const { return indices_.size(); }
  const std::vector<std::size_t>& operator[](std::size_t r) const { return indices_[r]; }

 private:
  std::vector<std::vector<std::size_t>> indices_;
};

inline BootstrapResult summarize(ScoreValue point, const std::vector<ScoreValue>& reps) {
  BootstrapResult out;
  out.point = point;
  double mean = 0.0;
  for (const auto& v : reps)
    if (v) {
      mean += v.value();
      ++out.valid;
    }
  out.discarded = reps.size() - out.valid;
  if (out.valid < 2) return out;
  mean /= static_cast<double>(out.valid);
  double ss = 0.0;
  for (const auto& v : reps)
    if (v) ss += (v.value() - mean) * (v.value() - mean);
  out.stddev = std::sqrt(ss / static_cast<double>(out.valid - 1));
  return out;
}

/// Bootstraps `metric`, a callable mapping a vector of instance indices to a
/// ScoreValue. Replicates where the metric is undefined are discarded.
template <typename Metric>
BootstrapResult bootstrap(std::size_t n, Metric&& metric, std::size_t replicates = 1000,
                          std::uint64_t seed = 42, unsigned threads = 1,
                          const std::vector<std::string>* groups = nullptr) {
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  const ScoreValue point = metric(all);
  const ResamplePlan plan(n, replicates, seed, groups, threads);
  std::vector<ScoreValue> reps(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) { reps[r] = metric(plan[r]); });
  return summarize(point, reps);
}

}  // namespace uqbench::eval

#endif  // UQBENCH_EVAL_BOOTSTRAP_HPP_
