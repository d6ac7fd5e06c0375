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

#include <set>

#include "quark/error.hpp"
#include "quark/simulation.hpp"
#include "quark/utf8.hpp"

namespace quark {
namespace {

SyntheticCorpusConfig small_corpus(std::uint64_t seed = 7) {
  SyntheticCorpusConfig c;
  c.docs = 400;
  c.seed = seed;
  return c;
}

TEST(Simulation, SynthCorpusIsDeterministic) {
  const Corpus a = synth_corpus(small_corpus());
  const Corpus b = synth_corpus(small_corpus());
  ASSERT_EQ(a.size(), 400u);
  ASSERT_EQ(a.size(), b.size());
  std::set<std::string> texts;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].doc_id, b[i].doc_id);
    EXPECT_EQ(a[i].text, b[i].text);
    EXPECT_LE(utf8::length(a[i].text), 30u);
    EXPECT_FALSE(a[i].text.empty());
    texts.insert(a[i].text);
  }
  EXPECT_EQ(texts.size(), a.size());
  const Corpus c = synth_corpus(small_corpus(8));
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs = differs || a[i].text != c[i].text;
  EXPECT_TRUE(differs);
}

TEST(Simulation, SimulateIsDeterministic) {
  const Corpus corpus = synth_corpus(small_corpus());
  SimulationConfig cfg;
  cfg.queries = 50;
  cfg.level = noise_level("L2");
  cfg.seed = 3;
  const Benchmark a = simulate(corpus, cfg);
  const Benchmark b = simulate(corpus, cfg);
  ASSERT_EQ(a.queries.size(), 50u);
  std::set<std::string> golds;
  for (std::size_t i = 0; i < a.queries.size(); ++i) {
    EXPECT_EQ(a.queries[i].qid, b.queries[i].qid);
    EXPECT_EQ(a.queries[i].text, b.queries[i].text);
    ASSERT_EQ(a.queries[i].gold.size(), 1u);
    EXPECT_EQ(a.qrels.grade(a.queries[i].qid, a.queries[i].gold[0]), 1);
    golds.insert(a.queries[i].gold[0]);
  }
  EXPECT_EQ(golds.size(), 50u);
  EXPECT_EQ(a.queries.front().qid, "q00");
  EXPECT_EQ(a.report.evaluated, 50u);
}

TEST(Simulation, IdentityLevelCopiesGold) {
  const Corpus corpus = synth_corpus(small_corpus());
  SimulationConfig cfg;
  cfg.queries = 20;
  cfg.level = identity_noise();
  const Benchmark b = simulate(corpus, cfg);
  for (const auto& q : b.queries) EXPECT_EQ(q.text, corpus[*corpus.position(q.gold[0])].text);
  EXPECT_EQ(b.report.edit_sim.mean, 1.0);
}

TEST(Simulation, Errors) {
  const Corpus corpus = synth_corpus(small_corpus());
  SimulationConfig cfg;
  cfg.queries = 401;
  cfg.level = noise_level("L1");
  try {
    simulate(corpus, cfg);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("length filter"), std::string::npos);
  }
  cfg.queries = 5;
  cfg.min_chars = 100;
  cfg.max_chars = 200;
  EXPECT_THROW(simulate(corpus, cfg), ValidationError);
}

TEST(Simulation, PresetsMatchTheirTargets) {
  SyntheticCorpusConfig cc;
  const Corpus corpus = synth_corpus(cc);
  double prev = 1.1;
  for (const char* name : {"L1", "L2", "L3"}) {
    SimulationConfig cfg;
    cfg.queries = 1000;
    cfg.level = noise_level(name);
    cfg.seed = 11;
    const Benchmark b = simulate(corpus, cfg);
    EXPECT_NEAR(b.report.edit_sim.mean, cfg.level.target_editsim, 0.02) << name;
    EXPECT_LT(b.report.edit_sim.mean, prev);
    prev = b.report.edit_sim.mean;
  }
}

}  // namespace
}  // namespace quark
