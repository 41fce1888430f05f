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

#ifndef UQBENCH_TEXT_METRICS_HPP_
#define UQBENCH_TEXT_METRICS_HPP_

// Surface-overlap metrics over whitespace tokens.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace uqbench::text {

inline std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(std::move(tok));
  return out;
}

inline std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// ROUGE-L F1 (beta = 1); symmetric. 0 when either side is empty.
inline double rouge_l(std::string_view a, std::string_view b) {
  const auto ta = tokenize(a);
  const auto tb = tokenize(b);
  if (ta.empty() || tb.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(ta, tb));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(tb.size());
  const double r = lcs / static_cast<double>(ta.size());
  return 2.0 * p * r / (p + r);
}

namespace detail {

using NgramCounts = std::map<std::vector<std::string>, int>;

inline NgramCounts ngrams(const std::vector<std::string>& toks, std::size_t n) {
  NgramCounts out;
  for (std::size_t i = 0; i + n <= toks.size(); ++i)
    ++out[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                   toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return out;
}

}  // namespace detail

/// Sentence BLEU of `candidate` against one `reference`: uniform weights over
/// 1..4-gram clipped precisions, add-one smoothing on orders 2..4 (BLEU+1),
/// standard brevity penalty. 0 when no unigram matches.
inline double bleu(std::string_view candidate, std::string_view reference) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  if (c.empty() || r.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto cn = detail::ngrams(c, n);
    const auto rn = detail::ngrams(r, n);
    double match = 0.0;
    for (const auto& [gram, count] : cn) {
      auto it = rn.find(gram);
      if (it != rn.end()) match += std::min(count, it->second);
    }
    const double total = c.size() >= n ? static_cast<double>(c.size() - n + 1) : 0.0;
    if (n == 1) {
      if (match == 0.0) return 0.0;
      log_sum += std::log(match / total);
    } else {
      log_sum += std::log((match + 1.0) / (total + 1.0));
    }
  }
  const double cl = static_cast<double>(c.size());
  const double rl = static_cast<double>(r.size());
  const double bp = cl > rl ? 1.0 : std::exp(1.0 - rl / cl);
  return bp * std::exp(log_sum / 4.0);
}

/// BLEU averaged over both directions, so the pair similarity is symmetric.
inline double bleu_symmetric(std::string_view a, std::string_view b) {
  return 0.5 * (bleu(a, b) + bleu(b, a));
}

/// Jaccard index of the unique whitespace-token sets; 0 if both are empty.
inline double jaccard(std::string_view a, std::string_view b) {
  const auto ta = tokenize(a);
  const auto tb = tokenize(b);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace uqbench::text

#endif  // UQBENCH_TEXT_METRICS_HPP_
