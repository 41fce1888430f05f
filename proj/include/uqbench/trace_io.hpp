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

#ifndef UQBENCH_TRACE_IO_HPP_
#define UQBENCH_TRACE_IO_HPP_

// Line-delimited JSON trace files. One GenerationTrace per line, each record
// carrying "schema_version". Paths ending in ".gz" are gzip-compressed.

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "uqbench/trace.hpp"

namespace uqbench {

using Json = nlohmann::ordered_json;

namespace io_detail {

inline const char* label_name(NliLabel l) {
  switch (l) {
    case NliLabel::kEntail: return "entail";
    case NliLabel::kContra: return "contra";
    case NliLabel::kNeutral: return "neutral";
  }
  return "neutral";
}

inline NliLabel parse_label(const std::string& s) {
  if (s == "entail") return NliLabel::kEntail;
  if (s == "contra") return NliLabel::kContra;
  if (s == "neutral") return NliLabel::kNeutral;
  throw DataError("nli_label must be one of entail/contra/neutral, got '" + s + "'");
}

inline Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json bool_matrix_to_json(const BoolMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(static_cast<bool>(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> matrix_from_json(const Json& j,
                                                                        const char* field) {
  if (!j.is_array()) throw DataError(std::string("field '") + field + "' must be a matrix");
  const auto n = static_cast<Eigen::Index>(j.size());
  const Eigen::Index m = n == 0 ? 0 : static_cast<Eigen::Index>(j.front().size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(n, m);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m)
      throw DataError(std::string("field '") + field + "' has ragged rows");
    for (Eigen::Index c = 0; c < m; ++c) out(r, c) = row[static_cast<std::size_t>(c)].get<Scalar>();
  }
  return out;
}

inline void check_keys(const Json& obj, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!obj.is_object()) throw DataError("'" + where + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw DataError("unknown field '" + where + (where.empty() ? "" : ".") + key + "'");
  }
}

template <typename T>
std::optional<T> opt(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return it->template get<T>();
}

template <typename T>
T req(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError("missing required field '" + where + key + "'");
  return it->template get<T>();
}

}  // namespace io_detail

inline Json to_json(const GenerationTrace& t) {
  using namespace io_detail;
  Json j;
  j["schema_version"] = std::string(kSchemaVersion);
  j["instance_id"] = t.instance_id;
  if (t.query_id) j["query_id"] = *t.query_id;
  j["split"] = t.split == Split::kTrain ? "train" : "eval";
  j["quality"] = {{"value", t.quality.value},
                  {"kind", t.quality.kind == QualityKind::kBinary ? "binary" : "continuous"}};
  j["response_text"] = t.response_text;
  if (t.attention) j["attention"] = {{"layers", t.attention->layers}, {"heads", t.attention->heads}};
  Json steps = Json::array();
  for (const TokenStep& s : t.response) {
    Json js;
    js["logprob_cond"] = s.logprob_cond;
    if (s.logprob_uncond) js["logprob_uncond"] = *s.logprob_uncond;
    if (s.entropy) js["entropy"] = *s.entropy;
    if (s.dist) {
      Json d = Json::array();
      for (const auto& e : *s.dist) d.push_back(Json::array({e.token_id, e.probability}));
      js["dist"] = std::move(d);
    }
    if (s.support_size) js["support_size"] = *s.support_size;
    if (s.alternatives) {
      Json alts = Json::array();
      for (const auto& a : *s.alternatives)
        alts.push_back({{"token_id", a.token_id},
                        {"probability", a.probability},
                        {"nli_label", label_name(a.nli_label)}});
      js["alternatives"] = std::move(alts);
    }
    if (s.loo_similarity) js["loo_similarity"] = *s.loo_similarity;
    if (s.attn_diag) js["attn_diag"] = *s.attn_diag;
    if (s.attn_prev) js["attn_prev"] = *s.attn_prev;
    if (s.attn_from_last) js["attn_from_last"] = *s.attn_from_last;
    steps.push_back(std::move(js));
  }
  j["response"] = std::move(steps);
  Json samples = Json::array();
  for (const SampleRecord& s : t.samples) {
    Json js;
    js["text"] = s.text;
    js["tokens"] = s.tokens;
    js["token_logprobs"] = s.token_logprobs;
    if (s.tokensar_logprobs) js["tokensar_logprobs"] = *s.tokensar_logprobs;
    if (s.embedding) js["embedding"] = *s.embedding;
    samples.push_back(std::move(js));
  }
  j["samples"] = std::move(samples);
  if (t.relations) {
    const auto& r = *t.relations;
    Json jr = Json::object();
    if (r.entail) jr["entail"] = matrix_to_json(*r.entail);
    if (r.contra) jr["contra"] = matrix_to_json(*r.contra);
    if (r.soft_entail) jr["soft_entail"] = matrix_to_json(*r.soft_entail);
    if (r.sent_sim) jr["sent_sim"] = matrix_to_json(*r.sent_sim);
    jr["sent_sim_includes_greedy"] = r.sent_sim_includes_greedy;
    if (r.sample_sim) jr["sample_sim"] = matrix_to_json(*r.sample_sim);
    if (r.bidir_entail_label) jr["bidir_entail_label"] = bool_matrix_to_json(*r.bidir_entail_label);
    if (r.kernel_scores)
      jr["kernel_scores"] = std::vector<double>(r.kernel_scores->data(),
                                                r.kernel_scores->data() + r.kernel_scores->size());
    j["relations"] = std::move(jr);
  }
  if (t.greedy_embedding) j["greedy_embedding"] = *t.greedy_embedding;
  if (t.reflexive) {
    Json jr = Json::object();
    if (t.reflexive->p_true) jr["p_true"] = *t.reflexive->p_true;
    if (t.reflexive->p_true_sampling) jr["p_true_sampling"] = *t.reflexive->p_true_sampling;
    if (t.reflexive->empirical_true_flags)
      jr["empirical_true_flags"] = *t.reflexive->empirical_true_flags;
    j["reflexive"] = std::move(jr);
  }
  return j;
}

inline GenerationTrace trace_from_json(const Json& j,
                                       std::string_view schema_version = kSchemaVersion) {
  using namespace io_detail;
  check_keys(j,
             {"schema_version", "instance_id", "query_id", "split", "quality", "response_text",
              "attention", "response", "samples", "relations", "greedy_embedding", "reflexive"},
             "");
  const auto version = req<std::string>(j, "schema_version", "");
  if (version != schema_version)
    throw DataError("schema_version mismatch: expected '" + std::string(schema_version) +
                    "', found '" + version + "'");
  GenerationTrace t;
  t.instance_id = req<std::string>(j, "instance_id", "");
  t.query_id = opt<std::string>(j, "query_id");
  const auto split = req<std::string>(j, "split", "");
  if (split == "train") {
    t.split = Split::kTrain;
  } else if (split == "eval") {
    t.split = Split::kEval;
  } else {
    throw DataError("field 'split' must be train or eval, got '" + split + "'");
  }
  const Json& q = j.at("quality");
  check_keys(q, {"value", "kind"}, "quality");
  t.quality.value = req<double>(q, "value", "quality.");
  const auto kind = req<std::string>(q, "kind", "quality.");
  if (kind == "binary") {
    t.quality.kind = QualityKind::kBinary;
  } else if (kind == "continuous") {
    t.quality.kind = QualityKind::kContinuous;
  } else {
    throw DataError("field 'quality.kind' must be binary or continuous");
  }
  t.response_text = j.value("response_text", std::string());
  if (auto it = j.find("attention"); it != j.end()) {
    check_keys(*it, {"layers", "heads"}, "attention");
    t.attention = AttentionShape{req<int>(*it, "layers", "attention."),
                                 req<int>(*it, "heads", "attention.")};
  }
  for (const Json& js : req<Json>(j, "response", "")) {
    check_keys(js,
               {"logprob_cond", "logprob_uncond", "entropy", "dist", "support_size",
                "alternatives", "loo_similarity", "attn_diag", "attn_prev", "attn_from_last"},
               "response");
    TokenStep s;
    s.logprob_cond = req<double>(js, "logprob_cond", "response.");
    s.logprob_uncond = opt<double>(js, "logprob_uncond");
    s.entropy = opt<double>(js, "entropy");
    if (auto it = js.find("dist"); it != js.end()) {
      std::vector<DistEntry> dist;
      for (const Json& e : *it) {
        if (!e.is_array() || e.size() != 2)
          throw DataError("field 'response.dist' entries must be [token_id, probability]");
        dist.push_back({e[0].get<std::int64_t>(), e[1].get<double>()});
      }
      s.dist = std::move(dist);
    }
    s.support_size = opt<std::int64_t>(js, "support_size");
    if (auto it = js.find("alternatives"); it != js.end()) {
      std::vector<AlternativeToken> alts;
      for (const Json& a : *it) {
        check_keys(a, {"token_id", "probability", "nli_label"}, "response.alternatives");
        alts.push_back({req<std::int64_t>(a, "token_id", "response.alternatives."),
                        req<double>(a, "probability", "response.alternatives."),
                        parse_label(req<std::string>(a, "nli_label", "response.alternatives."))});
      }
      s.alternatives = std::move(alts);
    }
    s.loo_similarity = opt<double>(js, "loo_similarity");
    s.attn_diag = opt<std::vector<double>>(js, "attn_diag");
    s.attn_prev = opt<std::vector<double>>(js, "attn_prev");
    s.attn_from_last = opt<double>(js, "attn_from_last");
    t.response.push_back(std::move(s));
  }
  if (auto it = j.find("samples"); it != j.end()) {
    for (const Json& js : *it) {
      check_keys(js, {"text", "tokens", "token_logprobs", "tokensar_logprobs", "embedding"},
                 "samples");
      SampleRecord s;
      s.text = js.value("text", std::string());
      s.tokens = req<std::vector<std::int64_t>>(js, "tokens", "samples.");
      s.token_logprobs = req<std::vector<double>>(js, "token_logprobs", "samples.");
      s.tokensar_logprobs = opt<std::vector<double>>(js, "tokensar_logprobs");
      s.embedding = opt<std::vector<double>>(js, "embedding");
      t.samples.push_back(std::move(s));
    }
  }
  if (auto it = j.find("relations"); it != j.end()) {
    const Json& jr = *it;
    check_keys(jr,
               {"entail", "contra", "soft_entail", "sent_sim", "sent_sim_includes_greedy",
                "sample_sim", "bidir_entail_label", "kernel_scores"},
               "relations");
    RelationMatrices r;
    if (jr.contains("entail")) r.entail = matrix_from_json<double>(jr["entail"], "relations.entail");
    if (jr.contains("contra")) r.contra = matrix_from_json<double>(jr["contra"], "relations.contra");
    if (jr.contains("soft_entail"))
      r.soft_entail = matrix_from_json<double>(jr["soft_entail"], "relations.soft_entail");
    if (jr.contains("sent_sim"))
      r.sent_sim = matrix_from_json<double>(jr["sent_sim"], "relations.sent_sim");
    r.sent_sim_includes_greedy = jr.value("sent_sim_includes_greedy", true);
    if (jr.contains("sample_sim"))
      r.sample_sim = matrix_from_json<double>(jr["sample_sim"], "relations.sample_sim");
    if (jr.contains("bidir_entail_label"))
      r.bidir_entail_label =
          matrix_from_json<bool>(jr["bidir_entail_label"], "relations.bidir_entail_label");
    if (jr.contains("kernel_scores")) {
      auto v = jr["kernel_scores"].get<std::vector<double>>();
      r.kernel_scores = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    t.relations = std::move(r);
  }
  t.greedy_embedding = opt<std::vector<double>>(j, "greedy_embedding");
  if (auto it = j.find("reflexive"); it != j.end()) {
    check_keys(*it, {"p_true", "p_true_sampling", "empirical_true_flags"}, "reflexive");
    ReflexiveRecord r;
    r.p_true = opt<double>(*it, "p_true");
    r.p_true_sampling = opt<double>(*it, "p_true_sampling");
    r.empirical_true_flags = opt<std::vector<bool>>(*it, "empirical_true_flags");
    t.reflexive = std::move(r);
  }
  return t;
}

inline std::string to_json_line(const GenerationTrace& t) { return to_json(t).dump(); }

struct TraceCorpus {
  std::vector<GenerationTrace> traces;
  std::size_t n_train = 0;
  std::size_t n_eval = 0;
};

/// Parses line-delimited records. Blank lines are skipped. Errors carry the
/// 1-based line number.
inline TraceCorpus parse_traces(std::istream& in, std::string_view schema_version = kSchemaVersion,
                                const std::string& source = "<stream>") {
  TraceCorpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      GenerationTrace t = trace_from_json(Json::parse(line), schema_version);
      validate(t);
      (t.split == Split::kTrain ? corpus.n_train : corpus.n_eval) += 1;
      corpus.traces.push_back(std::move(t));
    } catch (const Json::exception& e) {
      throw DataError(source + ":" + std::to_string(lineno) + ": malformed record: " + e.what());
    } catch (const DataError& e) {
      throw DataError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  validate_corpus(corpus.traces);
  return corpus;
}

inline bool has_gz_extension(const std::string& path) {
  return path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

inline std::string read_file(const std::string& path) {
  if (has_gz_extension(path)) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw DataError("cannot open trace file '" + path + "'");
    std::string out;
    char buf[1 << 16];
    int n = 0;
    while ((n = gzread(f, buf, sizeof(buf))) > 0) out.append(buf, static_cast<std::size_t>(n));
    const bool bad = n < 0;
    gzclose(f);
    if (bad) throw DataError("corrupt gzip stream in '" + path + "'");
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open trace file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  if (has_gz_extension(path)) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) throw DataError("cannot write '" + path + "'");
    const int n = content.empty() ? 0 : gzwrite(f, content.data(), static_cast<unsigned>(content.size()));
    gzclose(f);
    if (!content.empty() && n == 0) throw DataError("gzip write failed for '" + path + "'");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << content;
}

inline TraceCorpus load_traces(const std::string& path,
                               std::string_view schema_version = kSchemaVersion) {
  std::istringstream in(read_file(path));
  return parse_traces(in, schema_version, path);
}

inline std::string serialize_traces(const std::vector<GenerationTrace>& traces) {
  std::string out;
  for (const auto& t : traces) {
    out += to_json_line(t);
    out += '\n';
  }
  return out;
}

inline void write_traces(const std::string& path, const std::vector<GenerationTrace>& traces) {
  write_file(path, serialize_traces(traces));
}

}  // namespace uqbench

#endif  // UQBENCH_TRACE_IO_HPP_
