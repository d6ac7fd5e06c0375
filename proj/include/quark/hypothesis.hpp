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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quark/corruptor.hpp"
#include "quark/types.hpp"

namespace quark {

enum class ProviderKind {
  kPrecomputed,      // hypotheses stored with the query record
  kLlmService,       // chat-completion endpoint
  kOracleCorruptor,  // seeded corruptions of the observed query
  kGoldCorruptor,    // seeded corruptions of the gold target; upper-bound diagnostics only
};

ProviderKind parse_provider_kind(std::string_view name);
std::string_view to_string(ProviderKind kind);

// Produces at most k() distinct, non-empty hypotheses per query.
class HypothesisProvider {
 public:
  explicit HypothesisProvider(std::size_t k);
  virtual ~HypothesisProvider() = default;

  std::size_t k() const noexcept { return k_; }
  virtual ProviderKind kind() const noexcept = 0;
  virtual std::vector<std::string> generate(const QueryRecord& query) const = 0;

 protected:
  // Normalizes, dedups and caps at k().
  std::vector<std::string> finalize(const std::vector<std::string>& raw) const;

 private:
  std::size_t k_;
};

class PrecomputedProvider final : public HypothesisProvider {
 public:
  using HypothesisProvider::HypothesisProvider;
  ProviderKind kind() const noexcept override { return ProviderKind::kPrecomputed; }
  std::vector<std::string> generate(const QueryRecord& query) const override;
};

class OracleCorruptorProvider final : public HypothesisProvider {
 public:
  OracleCorruptorProvider(std::size_t k, NoiseLevel level, std::uint64_t seed);
  ProviderKind kind() const noexcept override { return ProviderKind::kOracleCorruptor; }
  std::vector<std::string> generate(const QueryRecord& query) const override;

 private:
  NoiseLevel level_;
  std::uint64_t seed_;
};

// Corrupts the hidden gold document instead of the query, so it sees
// information no real system has. Use it only to bound what perfect
// hypotheses could achieve.
class GoldCorruptorProvider final : public HypothesisProvider {
 public:
  GoldCorruptorProvider(std::size_t k, NoiseLevel level, std::uint64_t seed, const Corpus& corpus);
  ProviderKind kind() const noexcept override { return ProviderKind::kGoldCorruptor; }
  std::vector<std::string> generate(const QueryRecord& query) const override;

 private:
  NoiseLevel level_;
  std::uint64_t seed_;
  const Corpus& corpus_;
};

struct LlmServiceConfig {
  std::string url;  // full chat-completions URL
  std::string model;
  std::string token_env;
  std::string prompt_template;  // text with {k} and {lyric} or {query}
  double temperature = 0.7;
  std::chrono::milliseconds timeout{120000};
  int retries = 2;
  std::size_t max_in_flight = 4;
};

class LlmServiceProvider final : public HypothesisProvider {
 public:
  LlmServiceProvider(std::size_t k, LlmServiceConfig config);
  ProviderKind kind() const noexcept override { return ProviderKind::kLlmService; }
  // Throws ProviderError carrying the qid on transport or format failures.
  std::vector<std::string> generate(const QueryRecord& query) const override;

  const LlmServiceConfig& config() const noexcept { return config_; }

 private:
  LlmServiceConfig config_;
};

// Names of the built-in prompt templates: lyrics, beir-generic, beir-fiqa,
// beir-scifact, beir-nfcorpus.
std::vector<std::string> prompt_template_names();
// Throws ValidationError for an unknown name.
std::string_view prompt_template(std::string_view name);
// Replaces {k}, {lyric} and {query}.
std::string instantiate_prompt(std::string_view tmpl, std::string_view query_text, std::size_t k);

// One hypothesis per non-empty line, normalized, deduplicated, first k kept.
std::vector<std::string> parse_hypothesis_lines(std::string_view content, std::size_t k);

// Runs the provider over every query. Work is spread over `jobs` threads
// (the LLM provider additionally caps in-flight requests); results keep
// query order.
std::vector<std::vector<std::string>> generate_all(const HypothesisProvider& provider,
                                                   std::span<const QueryRecord> queries,
                                                   std::size_t jobs = 1);

}  // namespace quark
