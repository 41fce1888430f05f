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

#ifndef UQBENCH_SCORE_TABLE_HPP_
#define UQBENCH_SCORE_TABLE_HPP_

// Estimator x instance score matrix and its CSV form:
//
//   estimator,family,<instance id>,...
//   MSP,information,3.25,NA,...
//
// Values are written in shortest round-trip form so a table survives a
// write/read cycle bit-for-bit. "NA" marks a missing score.

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "uqbench/common.hpp"

namespace uqbench {

enum class Family { kInformation, kSample, kInternal, kTraining, kReflexive, kBlackbox };

inline constexpr std::array<std::pair<Family, std::string_view>, 6> kFamilyNames{{
    {Family::kInformation, "information"},
    {Family::kSample, "sample"},
    {Family::kInternal, "internal"},
    {Family::kTraining, "training"},
    {Family::kReflexive, "reflexive"},
    {Family::kBlackbox, "blackbox"},
}};

inline std::string_view to_string(Family f) {
  for (const auto& [fam, name] : kFamilyNames)
    if (fam == f) return name;
  return "?";
}

inline Family parse_family(std::string_view s) {
  for (const auto& [fam, name] : kFamilyNames)
    if (name == s) return fam;
  throw DataError("unknown estimator family '" + std::string(s) + "'");
}

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline std::string format_value(double v) { return std::isnan(v) ? "NA" : format_double(v); }

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    throw DataError(where + ": not a finite number: '" + std::string(s) + "'");
  return v;
}

struct ScoreTable {
  std::vector<std::string> instances;
  std::vector<std::string> estimators;
  std::vector<Family> families;
  std::vector<std::vector<double>> values;  // [estimator][instance], NaN = missing

  std::size_t rows() const { return estimators.size(); }
  std::size_t cols() const { return instances.size(); }

  void check_shape() const {
    if (families.size() != estimators.size() || values.size() != estimators.size())
      throw DataError("score table: estimator metadata does not match row count");
    for (std::size_t r = 0; r < values.size(); ++r)
      if (values[r].size() != instances.size())
        throw DataError("score table: row '" + estimators[r] + "' has " + std::to_string(values[r].size()) +
                        " values for " + std::to_string(instances.size()) + " instances");
  }

  std::size_t row_of(std::string_view id) const {
    for (std::size_t r = 0; r < estimators.size(); ++r)
      if (estimators[r] == id) return r;
    throw DataError("score table: no estimator '" + std::string(id) + "'");
  }
};

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline void check_cell(const std::string& s, const char* what) {
  if (s.empty() || s.find_first_of(",\"\r\n") != std::string::npos)
    throw DataError(std::string("score table: ") + what + " '" + s + "' cannot be written as a CSV cell");
}

}  // namespace detail

inline void write_csv(std::ostream& os, const ScoreTable& t) {
  t.check_shape();
  os << "estimator,family";
  for (const auto& id : t.instances) {
    detail::check_cell(id, "instance id");
    os << ',' << id;
  }
  os << '\n';
  for (std::size_t r = 0; r < t.rows(); ++r) {
    detail::check_cell(t.estimators[r], "estimator id");
    os << t.estimators[r] << ',' << to_string(t.families[r]);
    for (double v : t.values[r]) os << ',' << format_value(v);
    os << '\n';
  }
}

inline std::string to_csv(const ScoreTable& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

inline ScoreTable read_csv(std::istream& is, const std::string& source = "scores") {
  ScoreTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  auto where = [&] { return source + ":" + std::to_string(lineno); };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (!have_header) {
      if (cells.size() < 2 || cells[0] != "estimator" || cells[1] != "family")
        throw DataError(where() + ": expected header 'estimator,family,...'");
      for (std::size_t c = 2; c < cells.size(); ++c) t.instances.emplace_back(cells[c]);
      have_header = true;
      continue;
    }
    if (cells.size() != t.instances.size() + 2)
      throw DataError(where() + ": expected " + std::to_string(t.instances.size() + 2) + " cells, found " +
                      std::to_string(cells.size()));
    t.estimators.emplace_back(cells[0]);
    try {
      t.families.push_back(parse_family(cells[1]));
    } catch (const DataError& e) {
      throw DataError(where() + ": " + e.what());
    }
    auto& row = t.values.emplace_back();
    row.reserve(t.instances.size());
    for (std::size_t c = 2; c < cells.size(); ++c)
      row.push_back(cells[c] == "NA" ? kMissing : parse_double(cells[c], where()));
  }
  if (!have_header)
    throw DataError(source + ": empty score table");
  return t;
}

}  // namespace uqbench

#endif  // UQBENCH_SCORE_TABLE_HPP_
