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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quark/aggregation.hpp"
#include "quark/dense.hpp"
#include "quark/hypothesis.hpp"
#include "quark/lexical.hpp"
#include "quark/metrics.hpp"
#include "quark/simulation.hpp"
#include "quark/tokenizer.hpp"

namespace quark {

// Flat string map read from a TOML-style file: `key = value` lines, optional
// double quotes around values, '#' comments, and `[section]` headers that
// prefix the following keys with "section.".
class ConfigMap {
 public:
  // Throws ParseError citing source:line on malformed lines or repeated keys.
  static ConfigMap parse(std::string_view text, std::string_view source = "<config>");
  static ConfigMap load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  // "key=value"; later assignments win.
  void apply_override(std::string_view assignment);
  std::optional<std::string> get(std::string_view key) const;
  const std::map<std::string, std::string, std::less<>>& entries() const noexcept {
    return values_;
  }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path queries;
  std::filesystem::path qrels;
  std::filesystem::path output_dir = "quark-out";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  // Generate the corpus instead of reading `corpus`.
  std::optional<SyntheticCorpusConfig> synth;
  // Simulate queries and qrels from the corpus instead of reading them.
  std::optional<SimulationConfig> simulate;

  std::string retriever = "lexical";  // lexical | dense
  Tokenizer tokenizer;
  Bm25Params bm25;
  EmbeddingSource doc_embeddings;
  EmbeddingSource query_embeddings;

  ProviderKind provider = ProviderKind::kPrecomputed;
  std::size_t k = 5;
  NoiseLevel hypothesis_level;
  LlmServiceConfig llm;

  AggregationConfig aggregation;
  bool missing_from_retriever = true;  // missing = auto
  std::size_t depth = 0;               // 0: default_depth(rank cutoff)
  EvalOptions eval;

  bool sweep = true;
  std::vector<double> grid;
  std::vector<std::size_t> ablate_k;  // empty: skip
  bool ablate_pooling = true;

  // Every key is recognized or a ValidationError names it.
  static PipelineConfig from_map(const ConfigMap& map);
  // Checks input paths and cross-field rules before any work starts.
  void validate() const;

  // Config entries that influence artifact contents; `jobs` and
  // `output_dir` are left out.
  std::map<std::string, std::string, std::less<>> fingerprint_entries;
};

enum class StageStatus { kOk, kCached, kSkipped, kFailed };
std::string_view to_string(StageStatus s);

struct ArtifactRecord {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct StageRecord {
  std::string name;
  StageStatus status = StageStatus::kOk;
  std::string fingerprint;
  std::vector<ArtifactRecord> outputs;
  std::string error;
};

struct PipelineResult {
  bool ok = false;
  std::vector<StageRecord> stages;
  std::filesystem::path manifest;
  std::string error;
};

// Runs prepare -> index -> hypothesize -> retrieve -> aggregate -> evaluate
// -> sweeps. Every stage output is hashed into manifest.json in the output
// directory. A stage whose fingerprint and outputs match the previous
// manifest is reloaded instead of recomputed. Stage failures are recorded in
// the manifest and reported through the result; config validation errors
// throw before anything is written.
PipelineResult run_pipeline(const PipelineConfig& cfg);

// Hex SHA-256 of a byte string or a file.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace quark
