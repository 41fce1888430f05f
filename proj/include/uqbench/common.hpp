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

#ifndef UQBENCH_COMMON_HPP_
#define UQBENCH_COMMON_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iostream>
#include <iterator>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace uqbench {

// Probability floor applied before taking the log of a recorded probability.
inline constexpr double kProbFloor = 1e-12;

/// Malformed input data: bad trace records, misaligned tables, invariant
/// violations. Maps to CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or usage. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An uncertainty score, or the missing marker when the estimator abstains.
/// Larger values mean more uncertain.
class ScoreValue {
 public:
  ScoreValue() = default;
  ScoreValue(double v) : value_(v) {}  // NOLINT(google-explicit-constructor)

  static ScoreValue missing() { return ScoreValue(); }

  bool has_value() const { return value_.has_value(); }
  explicit operator bool() const { return has_value(); }
  double value() const { return value_.value(); }
  double value_or(double fallback) const { return value_.value_or(fallback); }

  friend bool operator==(const ScoreValue&, const ScoreValue&) = default;

 private:
  std::optional<double> value_;
};

/// Uniform index in [0, n) by bitmask rejection on raw 64-bit engine output.
/// Unlike std::uniform_int_distribution the result does not depend on the
/// standard library, which keeps resampled outputs reproducible everywhere.
template <typename Engine>
std::size_t uniform_index(Engine& rng, std::size_t n) {
  if (n <= 1) return 0;
  std::uint64_t mask = n - 1;
  for (int shift = 1; shift < 64; shift <<= 1) mask |= mask >> shift;
  while (true) {
    const std::uint64_t x = static_cast<std::uint64_t>(rng()) & mask;
    if (x < n) return static_cast<std::size_t>(x);
  }
}

/// Rounds x to the nearest multiple of 2^-40. Aggregates of similarities
/// and eigenvalues pick up last-bit noise depending on summation order, so
/// mathematically tied scores can differ by an ulp; snapping makes such ties
/// exact and leaves distinct values at least ~1e-12 apart.
inline double snap_to_grid(double x) {
  if (!std::isfinite(x) || std::abs(x) >= 4096.0) return x;
  return std::ldexp(std::nearbyint(std::ldexp(x, 40)), -40) + 0.0;
}

/// Fisher-Yates shuffle on uniform_index (std::shuffle is library-specific).
template <typename It, typename Engine>
void portable_shuffle(It first, It last, Engine& rng) {
  const auto n = static_cast<std::size_t>(std::distance(first, last));
  for (std::size_t i = n; i > 1; --i) std::iter_swap(first + static_cast<std::ptrdiff_t>(i - 1),
                                                     first + static_cast<std::ptrdiff_t>(uniform_index(rng, i)));
}

inline double safe_log(double p) { return std::log(p < kProbFloor ? kProbFloor : p); }

// Warning sink. Library code never aborts on recoverable numerical
// fallbacks; it reports them here.
inline void warn(std::string_view msg) { std::cerr << "uqbench: warning: " << msg << '\n'; }

}  // namespace uqbench

#endif  // UQBENCH_COMMON_HPP_
