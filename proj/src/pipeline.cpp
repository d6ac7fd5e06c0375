// Copyright 2026 The Quark Authors
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

#include "quark/pipeline.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <set>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "quark/error.hpp"
#include "quark/experiments.hpp"
#include "quark/io.hpp"
#include "quark/retriever.hpp"
#include "quark/utf8.hpp"

namespace quark {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// ConfigMap

namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Drops a trailing comment that sits outside double quotes.
std::string_view drop_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string unquote(std::string_view v, std::string_view where) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    return std::string(v.substr(1, v.size() - 2));
  }
  if (!v.empty() && (v.front() == '"' || v.back() == '"')) {
    throw ParseError(std::string(where) + ": unbalanced quotes");
  }
  return std::string(v);
}

}  // namespace

ConfigMap ConfigMap::parse(std::string_view text, std::string_view source) {
  ConfigMap out;
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    const std::string_view line = strip(drop_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(where + ": malformed section header");
      section = std::string(strip(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(where + ": expected key = value");
    const std::string_view key = strip(line.substr(0, eq));
    if (key.empty()) throw ParseError(where + ": empty key");
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (out.values_.count(full) != 0) throw ParseError(where + ": key '" + full + "' repeated");
    out.values_[full] = unquote(strip(line.substr(eq + 1)), where);
  }
  return out;
}

ConfigMap ConfigMap::load(const fs::path& path) {
  return parse(read_file(path), path.string());
}

void ConfigMap::set(const std::string& key, std::string value) { values_[key] = std::move(value); }

void ConfigMap::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || strip(assignment.substr(0, eq)).empty()) {
    throw ValidationError("override '" + std::string(assignment) + "' is not key=value");
  }
  set(std::string(strip(assignment.substr(0, eq))),
      unquote(strip(assignment.substr(eq + 1)), "override"));
}

std::optional<std::string> ConfigMap::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// PipelineConfig

namespace {

class KeyReader {
 public:
  explicit KeyReader(const ConfigMap& map) : map_(map) {}

  std::optional<std::string> str(const std::string& key) {
    used_.insert(key);
    return map_.get(key);
  }
  bool has(const std::string& key) const { return map_.get(key).has_value(); }

  template <typename T>
  std::optional<T> num(const std::string& key) {
    const auto v = str(key);
    if (!v) return std::nullopt;
    T out{};
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size()) {
      throw ValidationError("config key '" + key + "': '" + *v + "' is not a valid number");
    }
    return out;
  }

  std::optional<bool> flag(const std::string& key) {
    const auto v = str(key);
    if (!v) return std::nullopt;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ValidationError("config key '" + key + "': expected true or false, got '" + *v + "'");
  }

  template <typename T>
  std::optional<std::vector<T>> list(const std::string& key) {
    const auto v = str(key);
    if (!v) return std::nullopt;
    std::vector<T> out;
    std::string_view rest = *v;
    if (!rest.empty() && rest.front() == '[' && rest.back() == ']') {
      rest = rest.substr(1, rest.size() - 2);
    }
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = strip(rest.substr(0, comma));
      rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
      if (item.empty()) continue;
      T x{};
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
      if (ec != std::errc() || ptr != item.data() + item.size()) {
        throw ValidationError("config key '" + key + "': bad list item '" + std::string(item) +
                              "'");
      }
      out.push_back(x);
    }
    return out;
  }

  void check_all_used() const {
    for (const auto& [key, value] : map_.entries()) {
      if (used_.count(key) == 0) throw ValidationError("unknown config key '" + key + "'");
    }
  }

 private:
  const ConfigMap& map_;
  std::set<std::string> used_;
};

NoiseLevel read_level(KeyReader& r, const std::string& prefix, const std::string& fallback) {
  NoiseLevel level = noise_level(r.str(prefix + "level").value_or(fallback));
  if (auto v = r.num<double>(prefix + "sub_rate")) level.sub_rate = *v;
  if (auto v = r.num<double>(prefix + "del_rate")) level.del_rate = *v;
  if (auto v = r.num<double>(prefix + "transpose_rate")) level.transpose_rate = *v;
  if (auto v = r.num<std::uint32_t>(prefix + "confusion_group")) level.confusion_group = *v;
  level.validate();
  return level;
}

void read_service(KeyReader& r, const std::string& prefix, EmbeddingServiceConfig& svc) {
  if (auto v = r.str(prefix + "url")) svc.url = *v;
  if (auto v = r.str(prefix + "model")) svc.model = *v;
  if (auto v = r.str(prefix + "token_env")) svc.token_env = *v;
  if (auto v = r.num<std::size_t>(prefix + "batch_size")) svc.batch_size = *v;
  if (auto v = r.num<std::size_t>(prefix + "max_in_flight")) svc.max_in_flight = *v;
  if (auto v = r.num<long>(prefix + "timeout_ms")) svc.timeout = std::chrono::milliseconds(*v);
  if (auto v = r.num<int>(prefix + "retries")) svc.retries = *v;
}

}  // namespace

PipelineConfig PipelineConfig::from_map(const ConfigMap& map) {
  KeyReader r(map);
  PipelineConfig c;
  if (auto v = r.str("corpus")) c.corpus = *v;
  if (auto v = r.str("queries")) c.queries = *v;
  if (auto v = r.str("qrels")) c.qrels = *v;
  if (auto v = r.str("output_dir")) c.output_dir = *v;
  if (auto v = r.num<std::uint64_t>("seed")) c.seed = *v;
  if (auto v = r.num<std::size_t>("jobs")) c.jobs = std::max<std::size_t>(1, *v);

  if (r.has("synth.docs")) {
    SyntheticCorpusConfig s;
    s.docs = *r.num<std::size_t>("synth.docs");
    if (auto v = r.num<std::size_t>("synth.alphabet")) s.alphabet = *v;
    if (auto v = r.num<std::size_t>("synth.vocabulary")) s.vocabulary = *v;
    if (auto v = r.num<std::size_t>("synth.family_size")) s.family_size = *v;
    if (auto v = r.num<std::size_t>("synth.min_chars")) s.min_chars = *v;
    if (auto v = r.num<std::size_t>("synth.max_chars")) s.max_chars = *v;
    if (auto v = r.num<std::size_t>("synth.truncate_chars")) s.truncate_chars = *v;
    if (auto v = r.num<double>("synth.variant_rate")) s.variant_rate = *v;
    s.seed = r.num<std::uint64_t>("synth.seed").value_or(derive_seed(c.seed, "synth"));
    c.synth = s;
  }
  if (r.has("simulate.queries")) {
    SimulationConfig s;
    s.queries = *r.num<std::size_t>("simulate.queries");
    s.level = read_level(r, "simulate.", "L2");
    if (auto v = r.num<std::size_t>("simulate.min_chars")) s.min_chars = *v;
    if (auto v = r.num<std::size_t>("simulate.max_chars")) s.max_chars = *v;
    s.seed = r.num<std::uint64_t>("simulate.seed").value_or(derive_seed(c.seed, "simulate"));
    c.simulate = s;
  }

  if (auto v = r.str("retriever")) c.retriever = *v;
  if (auto v = r.str("tokenizer")) c.tokenizer.mode = parse_tokenizer_mode(*v);
  if (auto v = r.flag("lowercase")) c.tokenizer.lowercase = *v;
  if (auto v = r.num<double>("bm25.k1")) c.bm25.k1 = *v;
  if (auto v = r.num<double>("bm25.b")) c.bm25.b = *v;

  if (auto v = r.str("dense.doc_embeddings")) c.doc_embeddings.path = *v;
  if (auto v = r.str("dense.query_embeddings")) c.query_embeddings.path = *v;
  read_service(r, "dense.", c.doc_embeddings.service);
  c.query_embeddings.service = c.doc_embeddings.service;
  if (c.doc_embeddings.path.empty() && !c.doc_embeddings.service.url.empty()) {
    c.doc_embeddings.kind = EmbeddingSource::Kind::kService;
  }
  if (c.query_embeddings.path.empty() && !c.query_embeddings.service.url.empty()) {
    c.query_embeddings.kind = EmbeddingSource::Kind::kService;
  }

  if (auto v = r.str("provider")) c.provider = parse_provider_kind(*v);
  if (auto v = r.num<std::size_t>("k")) c.k = *v;
  c.hypothesis_level = read_level(r, "hypothesis.", "H");
  if (auto v = r.str("llm.url")) c.llm.url = *v;
  if (auto v = r.str("llm.model")) c.llm.model = *v;
  if (auto v = r.str("llm.token_env")) c.llm.token_env = *v;
  c.llm.prompt_template = std::string(prompt_template(r.str("llm.template").value_or("lyrics")));
  if (auto v = r.str("llm.template_file")) c.llm.prompt_template = read_file(*v);
  if (auto v = r.num<double>("llm.temperature")) c.llm.temperature = *v;
  if (auto v = r.num<long>("llm.timeout_ms")) c.llm.timeout = std::chrono::milliseconds(*v);
  if (auto v = r.num<int>("llm.retries")) c.llm.retries = *v;
  if (auto v = r.num<std::size_t>("llm.max_in_flight")) c.llm.max_in_flight = *v;

  if (auto v = r.num<double>("alpha")) c.aggregation.alpha = *v;
  if (auto v = r.str("pooling")) c.aggregation.pooling = parse_pooling(*v);
  if (auto v = r.str("missing"); v && *v != "auto") {
    c.aggregation.missing = parse_missing_policy(*v);
    c.missing_from_retriever = false;
  }
  if (auto v = r.num<std::size_t>("output_depth")) c.aggregation.output_depth = *v;
  if (auto v = r.flag("normalize")) c.aggregation.normalize_runs = *v;
  if (auto v = r.num<std::size_t>("depth")) c.depth = *v;
  if (auto v = r.list<std::size_t>("cutoffs")) c.eval.recall_cutoffs = *v;
  if (auto v = r.num<std::size_t>("rank_cutoff")) c.eval.rank_cutoff = *v;

  if (auto v = r.flag("sweep")) c.sweep = *v;
  c.grid = alpha_grid();
  if (auto v = r.str("grid"); v && *v != "default") c.grid = *r.list<double>("grid");
  if (auto v = r.list<std::size_t>("ablate_k")) c.ablate_k = *v;
  if (auto v = r.flag("ablate_pooling")) c.ablate_pooling = *v;
  r.check_all_used();

  c.eval.jobs = c.jobs;
  for (const auto& [key, value] : map.entries()) {
    if (key != "jobs" && key != "output_dir") c.fingerprint_entries.emplace(key, value);
  }
  return c;
}

void PipelineConfig::validate() const {
  auto require = [](const fs::path& p, const char* what) {
    if (p.empty()) throw ValidationError(std::string("config: no ") + what + " path given");
    if (!fs::exists(p)) {
      throw ValidationError(std::string("config: ") + what + " file '" + p.string() +
                            "' does not exist");
    }
  };
  if (!synth) require(corpus, "corpus");
  if (!simulate) {
    require(queries, "queries");
    require(qrels, "qrels");
  }
  if (retriever != "lexical" && retriever != "dense") {
    throw ValidationError("config: retriever must be lexical or dense, got '" + retriever + "'");
  }
  if (retriever == "dense") {
    if (doc_embeddings.kind == EmbeddingSource::Kind::kFile) {
      require(doc_embeddings.path, "dense.doc_embeddings");
    }
    if (query_embeddings.kind == EmbeddingSource::Kind::kFile) {
      require(query_embeddings.path, "dense.query_embeddings");
    }
  }
  if (provider == ProviderKind::kLlmService && llm.url.empty()) {
    throw ValidationError("config: the llm provider needs llm.url");
  }
  aggregation.validate();
  if (eval.rank_cutoff == 0) throw ValidationError("config: rank_cutoff must be >= 1");
  for (std::size_t m : eval.recall_cutoffs) {
    if (m == 0) throw ValidationError("config: cutoffs must be >= 1");
  }
  if (sweep && grid.empty()) throw ValidationError("config: empty alpha grid");
  for (double a : grid) {
    if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("config: grid values must lie in [0, 1]");
  }
}

std::string_view to_string(StageStatus s) {
  switch (s) {
    case StageStatus::kOk: return "ok";
    case StageStatus::kCached: return "cached";
    case StageStatus::kSkipped: return "skipped";
    case StageStatus::kFailed: return "failed";
  }
  return "ok";
}

// ---------------------------------------------------------------------------
// Hashing

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

// ---------------------------------------------------------------------------
// Pipeline

namespace {

struct StageFailed {};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Runner {
 public:
  explicit Runner(const PipelineConfig& cfg) : cfg_(cfg), out_(cfg.output_dir) {
    std::string canon = "quark-pipeline-v1\n";
    for (const auto& [k, v] : cfg.fingerprint_entries) canon += k + "=" + v + "\n";
    config_hash_ = sha256_hex(canon);
    chain_ = config_hash_;
    load_previous();
  }

  PipelineResult run();

 private:
  using Action = std::function<void()>;

  void load_previous();
  void write_manifest(const std::string& status);
  bool outputs_intact(const StageRecord& prev) const;
  // Runs or reuses one stage. `compute` writes the outputs, `load` reads
  // them back; both paths end in `load` so cached and fresh runs agree.
  void stage(const std::string& name, std::vector<std::string> outputs, const Action& compute,
             const Action& load, std::string extra_inputs = {});
  void skip(const std::string& name);

  std::vector<std::string> header(std::string_view stage) const {
    return {"seed=" + std::to_string(cfg_.seed) + " stage=" + std::string(stage),
            "config=" + config_hash_.substr(0, 16)};
  }
  std::string csv_header(std::string_view stage) const {
    return "# seed=" + std::to_string(cfg_.seed) + " stage=" + std::string(stage) + "\n";
  }
  fs::path at(const std::string& name) const { return out_ / name; }

  void prepare();
  void index();
  void hypothesize();
  void retrieve();
  void aggregate_stage();
  void evaluate();
  void experiments();
  void faithfulness_stage();

  const Retriever& retriever() const {
    return lexical_retriever_ ? static_cast<const Retriever&>(*lexical_retriever_)
                              : static_cast<const Retriever&>(*dense_retriever_);
  }
  AggregationConfig aggregation_config() const {
    AggregationConfig a = cfg_.aggregation;
    if (cfg_.missing_from_retriever) a.missing = retriever().default_missing_policy();
    return a;
  }
  std::vector<ExactScorer> rescorers(const AggregationConfig& a) const {
    if (a.missing != MissingScorePolicy::kExactRescore) return {};
    return make_rescorers(retriever(), queries_);
  }
  std::size_t depth() const {
    return cfg_.depth > 0 ? cfg_.depth : default_depth(cfg_.eval.rank_cutoff);
  }

  const PipelineConfig& cfg_;
  fs::path out_;
  std::string config_hash_;
  std::string chain_;
  std::string started_at_ = utc_now();
  std::map<std::string, StageRecord> previous_;
  std::vector<StageRecord> stages_;

  std::optional<Corpus> corpus_;
  std::vector<QueryRecord> queries_;
  Qrels qrels_;
  std::optional<LexicalIndex> lexical_;
  std::optional<VectorIndex> dense_;
  EmbeddingMatrix query_vectors_;
  std::optional<LexicalRetriever> lexical_retriever_;
  std::optional<DenseRetriever> dense_retriever_;
  std::vector<RunBundle> bundles_;
  std::vector<RunList> aggregated_;
};

void Runner::load_previous() {
  const fs::path path = at("manifest.json");
  if (!fs::exists(path)) return;
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    for (const auto& s : j.at("stages")) {
      StageRecord rec;
      rec.name = s.at("name").get<std::string>();
      const std::string status = s.at("status").get<std::string>();
      rec.status = status == "failed" ? StageStatus::kFailed
                   : status == "skipped" ? StageStatus::kSkipped
                                         : StageStatus::kOk;
      rec.fingerprint = s.at("fingerprint").get<std::string>();
      for (const auto& o : s.at("outputs")) {
        rec.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>(),
                               o.at("bytes").get<std::uintmax_t>()});
      }
      previous_[rec.name] = std::move(rec);
    }
  } catch (const std::exception& e) {
    spdlog::warn("ignoring unreadable manifest {}: {}", path.string(), e.what());
    previous_.clear();
  }
}

bool Runner::outputs_intact(const StageRecord& prev) const {
  for (const auto& o : prev.outputs) {
    const fs::path p = at(o.path);
    if (!fs::exists(p) || sha256_file(p) != o.sha256) return false;
  }
  return true;
}

void Runner::write_manifest(const std::string& status) {
  ojson j;
  j["tool"] = "quark";
  j["status"] = status;
  j["seed"] = cfg_.seed;
  j["config_sha256"] = config_hash_;
  j["config"] = ojson::object();
  for (const auto& [k, v] : cfg_.fingerprint_entries) j["config"][k] = v;
  j["started_at"] = started_at_;
  j["finished_at"] = utc_now();
  j["stages"] = ojson::array();
  for (const auto& s : stages_) {
    ojson js;
    js["name"] = s.name;
    js["status"] = std::string(to_string(s.status));
    js["fingerprint"] = s.fingerprint;
    js["outputs"] = ojson::array();
    for (const auto& o : s.outputs) {
      js["outputs"].push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
    }
    if (!s.error.empty()) js["error"] = s.error;
    j["stages"].push_back(std::move(js));
  }
  write_file(at("manifest.json"), j.dump(2) + "\n");
}

void Runner::stage(const std::string& name, std::vector<std::string> outputs,
                   const Action& compute, const Action& load, std::string extra_inputs) {
  StageRecord rec;
  rec.name = name;
  rec.fingerprint = sha256_hex(chain_ + "\n" + name + "\n" + extra_inputs);
  chain_ = rec.fingerprint;
  try {
    auto prev = previous_.find(name);
    const bool reusable = prev != previous_.end() && prev->second.status != StageStatus::kFailed &&
                          prev->second.status != StageStatus::kSkipped &&
                          prev->second.fingerprint == rec.fingerprint &&
                          prev->second.outputs.size() == outputs.size() &&
                          outputs_intact(prev->second);
    if (reusable) {
      rec.status = StageStatus::kCached;
      rec.outputs = prev->second.outputs;
      if (load) load();
      spdlog::info("stage {}: cached", name);
    } else {
      spdlog::info("stage {}: running", name);
      compute();
      for (const auto& o : outputs) {
        const fs::path p = at(o);
        rec.outputs.push_back({o, sha256_file(p), fs::file_size(p)});
      }
      if (load) load();
    }
  } catch (const std::exception& e) {
    rec.status = StageStatus::kFailed;
    rec.error = e.what();
    stages_.push_back(std::move(rec));
    spdlog::error("stage {} failed: {}", name, e.what());
    write_manifest("failed");
    throw StageFailed{};
  }
  // Later stages depend on the exact bytes this one produced.
  for (const auto& o : rec.outputs) chain_ = sha256_hex(chain_ + o.sha256);
  stages_.push_back(std::move(rec));
}

void Runner::skip(const std::string& name) {
  StageRecord rec;
  rec.name = name;
  rec.status = StageStatus::kSkipped;
  rec.fingerprint = sha256_hex(chain_ + "\n" + name + "\nskipped");
  stages_.push_back(std::move(rec));
}

void Runner::prepare() {
  std::vector<std::string> outputs;
  std::string inputs;
  if (cfg_.synth) {
    outputs.push_back("corpus.jsonl");
  } else {
    inputs += "corpus=" + sha256_file(cfg_.corpus) + "\n";
  }
  if (cfg_.simulate) {
    outputs.push_back("queries.jsonl");
    outputs.push_back("qrels.tsv");
  } else {
    inputs += "queries=" + sha256_file(cfg_.queries) + "\n";
    inputs += "qrels=" + sha256_file(cfg_.qrels) + "\n";
  }
  const fs::path corpus_path = cfg_.synth ? at("corpus.jsonl") : cfg_.corpus;
  const fs::path queries_path = cfg_.simulate ? at("queries.jsonl") : cfg_.queries;
  const fs::path qrels_path = cfg_.simulate ? at("qrels.tsv") : cfg_.qrels;
  stage(
      "prepare", outputs,
      [&] {
        if (cfg_.synth) write_corpus(synth_corpus(*cfg_.synth), corpus_path);
        if (cfg_.simulate) {
          const Benchmark b = simulate(load_corpus(corpus_path), *cfg_.simulate);
          write_queries(b.queries, queries_path);
          write_qrels(b.qrels, qrels_path);
        }
      },
      [&] {
        corpus_.emplace(load_corpus(corpus_path));
        queries_ = load_queries(queries_path);
        qrels_ = load_qrels(qrels_path);
      },
      inputs);
}

void Runner::index() {
  if (cfg_.retriever == "lexical") {
    stage(
        "index", {"index.bm25"},
        [&] { LexicalIndex::build(*corpus_, cfg_.tokenizer, cfg_.bm25).save(at("index.bm25")); },
        [&] {
          lexical_.emplace(LexicalIndex::load(at("index.bm25")));
          lexical_retriever_.emplace(*lexical_);
        });
    return;
  }
  std::string inputs;
  if (cfg_.doc_embeddings.kind == EmbeddingSource::Kind::kFile) {
    inputs = "doc_embeddings=" + sha256_file(cfg_.doc_embeddings.path);
  }
  stage(
      "index", {"index.vec"},
      [&] {
        std::vector<std::string> ids;
        std::vector<std::string> texts;
        for (const auto& d : corpus_->docs()) {
          ids.push_back(d.doc_id);
          texts.push_back(d.full_text());
        }
        VectorIndex(ingest_embeddings(cfg_.doc_embeddings, ids, texts)).save(at("index.vec"));
      },
      [&] { dense_.emplace(VectorIndex::load(at("index.vec"))); }, inputs);
}

void Runner::hypothesize() {
  stage(
      "hypothesize", {"hypotheses.jsonl"},
      [&] {
        std::unique_ptr<HypothesisProvider> provider;
        const std::uint64_t seed = derive_seed(cfg_.seed, "hypothesize");
        switch (cfg_.provider) {
          case ProviderKind::kPrecomputed:
            provider = std::make_unique<PrecomputedProvider>(cfg_.k);
            break;
          case ProviderKind::kOracleCorruptor:
            provider = std::make_unique<OracleCorruptorProvider>(cfg_.k, cfg_.hypothesis_level, seed);
            break;
          case ProviderKind::kGoldCorruptor:
            provider = std::make_unique<GoldCorruptorProvider>(cfg_.k, cfg_.hypothesis_level, seed,
                                                               *corpus_);
            break;
          case ProviderKind::kLlmService:
            provider = std::make_unique<LlmServiceProvider>(cfg_.k, cfg_.llm);
            break;
        }
        auto hyps = generate_all(*provider, queries_, cfg_.jobs);
        std::vector<QueryRecord> out = queries_;
        for (std::size_t i = 0; i < out.size(); ++i) out[i].hypotheses = std::move(hyps[i]);
        write_queries(out, at("hypotheses.jsonl"));
      },
      [&] { queries_ = load_queries(at("hypotheses.jsonl")); });
}

void Runner::retrieve() {
  std::vector<std::string> outputs{"base.run", "hypotheses.run"};
  std::string inputs = "depth=" + std::to_string(depth());
  const bool dense = cfg_.retriever == "dense";
  if (dense) {
    outputs.insert(outputs.begin(), "query_vectors.tsv");
    if (cfg_.query_embeddings.kind == EmbeddingSource::Kind::kFile) {
      inputs += "\nquery_embeddings=" + sha256_file(cfg_.query_embeddings.path);
    }
  }
  stage(
      "retrieve", outputs,
      [&] {
        if (dense) {
          std::vector<std::string> keys;
          std::vector<std::string> texts;
          collect_inputs(queries_, keys, texts);
          EmbeddingMatrix vectors;
          if (cfg_.query_embeddings.kind == EmbeddingSource::Kind::kService) {
            vectors = ingest_embeddings(cfg_.query_embeddings, keys, texts);
          } else {
            const EmbeddingMatrix all = load_embedding_file(cfg_.query_embeddings.path);
            vectors = EmbeddingMatrix(all.dim());
            for (const auto& key : keys) {
              const auto row = all.find(key);
              if (!row) throw DataError("query embeddings lack a vector for '" + key + "'");
              vectors.append(key, all.row(*row));
            }
          }
          write_embedding_file(vectors, at("query_vectors.tsv"));
          query_vectors_ = load_embedding_file(at("query_vectors.tsv"));
          dense_retriever_.emplace(*dense_, query_vectors_);
        }
        const auto bundles = retrieve_bundles(retriever(), queries_, depth(), cfg_.jobs);
        std::vector<RunList> base;
        std::vector<RunList> hyps;
        for (const auto& b : bundles) {
          base.push_back(b.base_run);
          for (std::size_t k = 0; k < b.hyp_runs.size(); ++k) {
            const auto entries = b.hyp_runs[k].entries();
            hyps.emplace_back(input_key(b.qid, k + 1),
                              std::vector<ScoredDoc>(entries.begin(), entries.end()));
          }
        }
        write_run(base, at("base.run"), retriever().name(), header("retrieve"));
        write_run(hyps, at("hypotheses.run"), retriever().name(), header("retrieve"));
      },
      [&] {
        if (dense) {
          query_vectors_ = load_embedding_file(at("query_vectors.tsv"));
          dense_retriever_.emplace(*dense_, query_vectors_);
        }
        std::map<std::string, RunList> runs;
        for (auto& r : read_run(at("base.run"))) runs.emplace(r.qid(), std::move(r));
        for (auto& r : read_run(at("hypotheses.run"))) runs.emplace(r.qid(), std::move(r));
        auto take = [&](const std::string& key, const std::string& qid) {
          auto it = runs.find(key);
          if (it == runs.end()) return RunList(qid);
          const auto entries = it->second.entries();
          return RunList(qid, std::vector<ScoredDoc>(entries.begin(), entries.end()));
        };
        bundles_.clear();
        for (const auto& q : queries_) {
          RunBundle b;
          b.qid = q.qid;
          b.base_run = take(q.qid, q.qid);
          for (std::size_t k = 0; k < q.hypotheses.size(); ++k) {
            b.hyp_runs.push_back(take(input_key(q.qid, k + 1), q.qid));
          }
          bundles_.push_back(std::move(b));
        }
      },
      inputs);
}

void Runner::aggregate_stage() {
  const AggregationConfig a = aggregation_config();
  stage(
      "aggregate", {"aggregated.run"},
      [&] {
        const auto scorers = rescorers(a);
        const auto runs = aggregate_all(bundles_, a, cfg_.jobs, scorers);
        write_run(runs, at("aggregated.run"), a.label(), header("aggregate"));
      },
      [&] { aggregated_ = read_run(at("aggregated.run")); },
      "aggregation=" + a.label() + " depth=" + std::to_string(a.output_depth));
}

void Runner::evaluate() {
  stage(
      "evaluate", {"eval.csv", "report.txt"},
      [&] {
        std::vector<std::string> universe;
        for (const auto& q : queries_) universe.push_back(q.qid);
        std::vector<RunList> base;
        for (const auto& b : bundles_) base.push_back(b.base_run);
        const EvalReport rb = evaluate_run(base, qrels_, cfg_.eval, &universe);
        const EvalReport ra = evaluate_run(aggregated_, qrels_, cfg_.eval, &universe);

        std::string csv = csv_header("evaluate") + "system";
        for (const auto& c : rb.column_names()) csv += "," + c;
        csv += ",evaluated,excluded\n";
        auto row = [&](const std::string& name, const EvalReport& r) {
          csv += name;
          for (double v : r.values()) csv += "," + format_score(v);
          csv += "," + std::to_string(r.evaluated) + "," + std::to_string(r.excluded) + "\n";
        };
        row("base", rb);
        row(aggregation_config().label(), ra);
        write_file(at("eval.csv"), csv);

        std::string txt = "# seed=" + std::to_string(cfg_.seed) + "\n\n[base]\n" + rb.to_text() +
                          "\n[" + aggregation_config().label() + "]\n" + ra.to_text();
        if (rb.evaluated >= 2) {
          char buf[160];
          txt += "\n[paired t-test, aggregated vs base]\n";
          for (const auto& [name, a, b] :
               {std::tuple{"mrr", &ra.mrr_per_query, &rb.mrr_per_query},
                std::tuple{"ndcg", &ra.ndcg_per_query, &rb.ndcg_per_query}}) {
            const PairedTestResult t = paired_ttest(*a, *b);
            std::snprintf(buf, sizeof(buf), "%-5s n=%zu mean_diff=%+.6f t=%.4f p=%.6g\n", name, t.n,
                          t.mean_diff, t.t_stat, t.p_value);
            txt += buf;
          }
        }
        write_file(at("report.txt"), txt);
      },
      nullptr);
}

void Runner::experiments() {
  const AggregationConfig a = aggregation_config();
  const auto scorers = rescorers(a);
  ExperimentOptions opts;
  opts.eval = cfg_.eval;
  opts.rescorers = scorers;
  if (cfg_.sweep) {
    stage(
        "sweep-alpha", {"sweep_alpha.csv"},
        [&] {
          const auto t = sweep_alpha(bundles_, a, qrels_, cfg_.grid, opts);
          write_file(at("sweep_alpha.csv"), csv_header("sweep-alpha") + t.to_csv());
        },
        nullptr);
  } else {
    skip("sweep-alpha");
  }
  if (!cfg_.ablate_k.empty()) {
    stage(
        "ablate-k", {"ablate_k.csv"},
        [&] {
          const auto t = ablate_k(bundles_, cfg_.ablate_k, a, qrels_, opts);
          write_file(at("ablate_k.csv"), csv_header("ablate-k") + t.to_csv());
        },
        nullptr);
  } else {
    skip("ablate-k");
  }
  if (cfg_.ablate_pooling) {
    stage(
        "ablate-pooling", {"ablate_pooling.csv"},
        [&] {
          const auto t = ablate_pooling(bundles_, a, qrels_, opts);
          write_file(at("ablate_pooling.csv"), csv_header("ablate-pooling") + t.to_csv());
        },
        nullptr);
  } else {
    skip("ablate-pooling");
  }
}

void Runner::faithfulness_stage() {
  bool any = false;
  for (const auto& q : queries_) any = any || q.gold.size() == 1;
  if (!any) {
    skip("faithfulness");
    return;
  }
  stage(
      "faithfulness", {"faithfulness.csv"},
      [&] {
        const auto rep = faithfulness_report(queries_, *corpus_);
        write_file(at("faithfulness.csv"), csv_header("faithfulness") + rep.to_csv());
      },
      nullptr);
}

PipelineResult Runner::run() {
  PipelineResult result;
  fs::create_directories(out_);
  try {
    prepare();
    index();
    hypothesize();
    retrieve();
    aggregate_stage();
    evaluate();
    experiments();
    faithfulness_stage();
    write_manifest("ok");
    result.ok = true;
  } catch (const StageFailed&) {
    result.error = stages_.back().name + ": " + stages_.back().error;
  }
  result.stages = stages_;
  result.manifest = at("manifest.json");
  return result;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  Runner runner(cfg);
  return runner.run();
}

}  // namespace quark
