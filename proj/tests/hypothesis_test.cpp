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

#include <gtest/gtest.h>

#include <atomic>
#include <mutex>

#include "json.hpp"
#include "quark/error.hpp"
#include "quark/hypothesis.hpp"
#include "test_util.hpp"

namespace quark {
namespace {

QueryRecord record(std::string qid, std::string text, std::vector<std::string> hyps = {},
                   std::vector<std::string> gold = {}) {
  return {std::move(qid), std::move(text), std::move(hyps), std::move(gold)};
}

TEST(Hypothesis, ProviderKinds) {
  for (auto k : {ProviderKind::kPrecomputed, ProviderKind::kLlmService,
                 ProviderKind::kOracleCorruptor, ProviderKind::kGoldCorruptor}) {
    EXPECT_EQ(parse_provider_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_provider_kind("magic"), ValidationError);
}

TEST(Hypothesis, PrecomputedTruncatesAndDedups) {
  PrecomputedProvider p(3);
  const auto out = p.generate(record("q", "x", {" a  b", "c", "a b", "", "d", "e"}));
  EXPECT_EQ(out, (std::vector<std::string>{"a b", "c", "d"}));
  EXPECT_TRUE(PrecomputedProvider(0).generate(record("q", "x", {"a"})).empty());
}

TEST(Hypothesis, OracleCollapsesUnderIdentityNoise) {
  OracleCorruptorProvider p(5, identity_noise(), 1);
  EXPECT_EQ(p.generate(record("q1", "月亮代表我的心")), std::vector<std::string>{"月亮代表我的心"});
}

TEST(Hypothesis, OracleIsDeterministicAndDistinct) {
  OracleCorruptorProvider p(5, noise_level("H"), 42);
  const auto q = record("q1", "我们在夜里唱着那首很久以前的老歌");
  const auto a = p.generate(q);
  EXPECT_EQ(a, p.generate(q));
  EXPECT_EQ(a.size(), 5u);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) EXPECT_NE(a[i], a[j]);
  // Seeded per qid.
  EXPECT_NE(a, p.generate(record("q2", q.text)));
  EXPECT_NE(a, OracleCorruptorProvider(5, noise_level("H"), 43).generate(q));
}

TEST(Hypothesis, GoldProvider) {
  Corpus corpus({{"d1", "月亮代表我的心", std::nullopt}});
  GoldCorruptorProvider p(3, identity_noise(), 1, corpus);
  EXPECT_EQ(p.generate(record("q", "月光", {}, {"d1"})), std::vector<std::string>{"月亮代表我的心"});
  try {
    p.generate(record("q9", "x", {}, {"d7"}));
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.qid(), "q9");
  }
}

TEST(Hypothesis, ParseLines) {
  EXPECT_EQ(parse_hypothesis_lines("a\n\n b \r\na\nc\n", 5),
            (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(parse_hypothesis_lines("1\n2\n3\n4\n5\n6\n7", 5).size(), 5u);
  EXPECT_TRUE(parse_hypothesis_lines("", 5).empty());
}

TEST(Hypothesis, Templates) {
  const auto names = prompt_template_names();
  for (const char* n : {"lyrics", "beir-generic", "beir-fiqa", "beir-scifact", "beir-nfcorpus"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
    EXPECT_FALSE(prompt_template(n).empty());
  }
  EXPECT_THROW(prompt_template("nope"), ValidationError);
  const std::string lyr = instantiate_prompt(prompt_template("lyrics"), "月亮", 5);
  EXPECT_NE(lyr.find("\"月亮\""), std::string::npos);
  EXPECT_EQ(lyr.find("{lyric}"), std::string::npos);
  EXPECT_EQ(lyr.find("{k}"), std::string::npos);
  EXPECT_EQ(instantiate_prompt("{k}:{query}|{lyric}", "x", 3), "3:x|x");
}

struct FakeChat {
  std::atomic<int> active{0};
  std::atomic<int> peak{0};
  std::atomic<int> calls{0};
  std::mutex mu;
  std::vector<nlohmann::json> bodies;
  std::vector<std::string> auth;

  void handle(const httplib::Request& req, httplib::Response& res) {
    const int now = ++active;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    ++calls;
    std::this_thread::sleep_for(std::chrono::milliseconds(15));
    const auto body = nlohmann::json::parse(req.body);
    {
      std::lock_guard lock(mu);
      bodies.push_back(body);
      auth.push_back(req.get_header_value("Authorization"));
    }
    const std::string prompt = body["messages"][0]["content"];
    --active;
    if (prompt.find("FAIL") != std::string::npos) {
      res.status = 500;
      return;
    }
    if (prompt.find("GARBAGE") != std::string::npos) {
      res.set_content("{\"nothing\": 1}", "application/json");
      return;
    }
    const std::string lines = "one\ntwo\n\nthree\ntwo\nfour\nfive\nsix\nseven\n";
    nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", lines}}}}}}};
    res.set_content(reply.dump(), "application/json");
  }
};

LlmServiceConfig llm_config(const testing::MockServer& server) {
  LlmServiceConfig cfg;
  cfg.url = server.url("/v1/chat/completions");
  cfg.model = "test-model";
  cfg.token_env = "QUARK_TEST_LLM_TOKEN";
  cfg.prompt_template = "Give {k} for {query}";
  cfg.retries = 0;
  cfg.max_in_flight = 2;
  return cfg;
}

TEST(Hypothesis, LlmProviderParsesReply) {
  FakeChat fake;
  testing::MockServer server("/v1/chat/completions",
                             [&](const auto& req, auto& res) { fake.handle(req, res); });
  ::setenv("QUARK_TEST_LLM_TOKEN", "tok", 1);
  LlmServiceProvider p(5, llm_config(server));
  EXPECT_EQ(p.generate(record("q", "hello")),
            (std::vector<std::string>{"one", "two", "three", "four", "five"}));
  ASSERT_EQ(fake.bodies.size(), 1u);
  EXPECT_EQ(fake.bodies[0]["model"], "test-model");
  EXPECT_EQ(fake.bodies[0]["messages"][0]["content"], "Give 5 for hello");
  EXPECT_EQ(fake.auth[0], "Bearer tok");
  ::unsetenv("QUARK_TEST_LLM_TOKEN");
}

TEST(Hypothesis, LlmFailuresCarryQid) {
  FakeChat fake;
  testing::MockServer server("/v1/chat/completions",
                             [&](const auto& req, auto& res) { fake.handle(req, res); });
  LlmServiceProvider p(5, llm_config(server));
  for (const char* text : {"FAIL", "GARBAGE"}) {
    try {
      p.generate(record("q42", text));
      FAIL() << text;
    } catch (const ProviderError& e) {
      EXPECT_EQ(e.qid(), "q42");
      EXPECT_NE(std::string(e.what()).find("q42"), std::string::npos);
    }
  }
}

TEST(Hypothesis, GenerateAllBoundsInFlight) {
  FakeChat fake;
  testing::MockServer server("/v1/chat/completions",
                             [&](const auto& req, auto& res) { fake.handle(req, res); });
  LlmServiceProvider p(2, llm_config(server));
  std::vector<QueryRecord> qs;
  for (int i = 0; i < 12; ++i) qs.push_back(record("q" + std::to_string(i), "t"));
  const auto out = generate_all(p, qs, 16);
  ASSERT_EQ(out.size(), 12u);
  for (const auto& h : out) EXPECT_EQ(h, (std::vector<std::string>{"one", "two"}));
  EXPECT_EQ(fake.calls.load(), 12);
  EXPECT_LE(fake.peak.load(), 2);
}

TEST(Hypothesis, GenerateAllMatchesSerial) {
  OracleCorruptorProvider p(4, noise_level("L3"), 9);
  std::vector<QueryRecord> qs;
  for (int i = 0; i < 40; ++i) qs.push_back(record("q" + std::to_string(i), "我们在夜里唱着老歌"));
  EXPECT_EQ(generate_all(p, qs, 1), generate_all(p, qs, 8));
}

}  // namespace
}  // namespace quark
