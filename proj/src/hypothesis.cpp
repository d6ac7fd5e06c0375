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

#include "quark/hypothesis.hpp"

#include <algorithm>
#include <mutex>

#include <spdlog/spdlog.h>

#include "prompts_generated.hpp"
#include "quark/error.hpp"
#include "quark/http.hpp"
#include "quark/parallel.hpp"
#include "quark/random.hpp"

namespace quark {

ProviderKind parse_provider_kind(std::string_view name) {
  if (name == "file" || name == "precomputed") return ProviderKind::kPrecomputed;
  if (name == "llm" || name == "llm-service") return ProviderKind::kLlmService;
  if (name == "oracle" || name == "oracle-corruptor") return ProviderKind::kOracleCorruptor;
  if (name == "oracle-gold" || name == "gold-corruptor") return ProviderKind::kGoldCorruptor;
  throw ValidationError("unknown hypothesis provider '" + std::string(name) + "'");
}

std::string_view to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::kPrecomputed: return "precomputed";
    case ProviderKind::kLlmService: return "llm-service";
    case ProviderKind::kOracleCorruptor: return "oracle-corruptor";
    case ProviderKind::kGoldCorruptor: return "gold-corruptor";
  }
  return "precomputed";
}

HypothesisProvider::HypothesisProvider(std::size_t k) : k_(k) {}

std::vector<std::string> HypothesisProvider::finalize(const std::vector<std::string>& raw) const {
  std::vector<std::string> out = dedup_hypotheses(raw);
  if (out.size() > k_) out.resize(k_);
  return out;
}

std::vector<std::string> PrecomputedProvider::generate(const QueryRecord& query) const {
  return finalize(query.hypotheses);
}

OracleCorruptorProvider::OracleCorruptorProvider(std::size_t k, NoiseLevel level,
                                                 std::uint64_t seed)
    : HypothesisProvider(k), level_(std::move(level)), seed_(seed) {
  level_.validate();
}

namespace {

// Seeded corruptions of `text` until k distinct ones are found or 4k draws
// are spent. A channel that rarely changes the text yields fewer.
std::vector<std::string> distinct_corruptions(const std::string& text, const NoiseLevel& level,
                                              std::uint64_t seed, std::size_t k) {
  std::vector<std::string> raw;
  for (std::size_t i = 0; i < 4 * k; ++i) {
    raw.push_back(corrupt_query(text, level, derive_seed(seed, "sample", i)));
    if (raw.size() >= k && dedup_hypotheses(raw).size() >= k) break;
  }
  return raw;
}

}  // namespace

std::vector<std::string> OracleCorruptorProvider::generate(const QueryRecord& query) const {
  if (query.text.empty()) return {};
  return finalize(distinct_corruptions(query.text, level_,
                                       derive_seed(seed_, "hypothesize", fnv1a64(query.qid)), k()));
}

GoldCorruptorProvider::GoldCorruptorProvider(std::size_t k, NoiseLevel level, std::uint64_t seed,
                                             const Corpus& corpus)
    : HypothesisProvider(k), level_(std::move(level)), seed_(seed), corpus_(corpus) {
  level_.validate();
  spdlog::warn("gold-corruptor hypotheses read the hidden target; results are an upper bound, "
               "not a valid evaluation");
}

std::vector<std::string> GoldCorruptorProvider::generate(const QueryRecord& query) const {
  if (query.gold.empty()) return {};
  auto pos = corpus_.position(query.gold.front());
  if (!pos) throw ProviderError(query.qid, "gold document '" + query.gold.front() + "' not in corpus");
  const std::string& target = corpus_[*pos].text;
  if (target.empty()) return {};
  return finalize(distinct_corruptions(
      target, level_, derive_seed(seed_, "hypothesize-gold", fnv1a64(query.qid)), k()));
}

LlmServiceProvider::LlmServiceProvider(std::size_t k, LlmServiceConfig config)
    : HypothesisProvider(k), config_(std::move(config)) {
  if (config_.url.empty()) throw ValidationError("LLM provider needs a service URL");
  if (config_.prompt_template.empty()) config_.prompt_template = prompt_template("lyrics");
  if (config_.max_in_flight == 0) config_.max_in_flight = 1;
}

std::vector<std::string> LlmServiceProvider::generate(const QueryRecord& query) const {
  if (k() == 0) return {};
  const std::string prompt = instantiate_prompt(config_.prompt_template, query.text, k());
  nlohmann::json body = {
      {"model", config_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", config_.temperature},
  };
  http::PostOptions opt;
  opt.timeout = config_.timeout;
  opt.retries = config_.retries;
  opt.bearer_token = http::token_from_env(config_.token_env);
  nlohmann::json reply;
  try {
    reply = http::post_json(config_.url, body, opt);
  } catch (const Error& e) {
    throw ProviderError(query.qid, e.what());
  }
  const auto choices = reply.find("choices");
  if (choices == reply.end() || !choices->is_array()) {
    throw ProviderError(query.qid, "reply has no 'choices' array");
  }
  if (choices->empty()) return {};
  const auto& first = (*choices)[0];
  std::string content;
  if (auto msg = first.find("message"); msg != first.end() && msg->is_object()) {
    auto c = msg->find("content");
    if (c != msg->end() && c->is_string()) content = c->get<std::string>();
    else if (c != msg->end() && !c->is_null()) throw ProviderError(query.qid, "message content is not text");
  } else if (auto text = first.find("text"); text != first.end() && text->is_string()) {
    content = text->get<std::string>();
  } else {
    throw ProviderError(query.qid, "choice has neither 'message' nor 'text'");
  }
  return parse_hypothesis_lines(content, k());
}

std::vector<std::string> prompt_template_names() {
  std::vector<std::string> names;
  for (const auto& t : generated::kPromptTemplates) names.emplace_back(t.name);
  return names;
}

std::string_view prompt_template(std::string_view name) {
  for (const auto& t : generated::kPromptTemplates) {
    if (t.name == name) return t.text;
  }
  throw ValidationError("unknown prompt template '" + std::string(name) + "'");
}

std::string instantiate_prompt(std::string_view tmpl, std::string_view query_text, std::size_t k) {
  std::string out;
  out.reserve(tmpl.size() + query_text.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        const std::string_view key = tmpl.substr(i + 1, close - i - 1);
        if (key == "lyric" || key == "query") {
          out += query_text;
          i = close + 1;
          continue;
        }
        if (key == "k" || key == "K") {
          out += std::to_string(k);
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

std::vector<std::string> parse_hypothesis_lines(std::string_view content, std::size_t k) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    lines.emplace_back(content.substr(pos, end - pos));
    pos = end + 1;
  }
  std::vector<std::string> out = dedup_hypotheses(lines);
  if (out.size() > k) out.resize(k);
  return out;
}

std::vector<std::vector<std::string>> generate_all(const HypothesisProvider& provider,
                                                   std::span<const QueryRecord> queries,
                                                   std::size_t jobs) {
  std::size_t workers = std::max<std::size_t>(1, jobs);
  if (const auto* llm = dynamic_cast<const LlmServiceProvider*>(&provider)) {
    workers = llm->config().max_in_flight;
  }
  std::vector<std::vector<std::string>> out(queries.size());
  if (provider.k() == 0) return out;
  parallel_for(queries.size(), workers,
               [&](std::size_t i) { out[i] = provider.generate(queries[i]); });
  return out;
}

}  // namespace quark
