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

#include <random>

#include "quark/error.hpp"
#include "quark/experiments.hpp"
#include "test_util.hpp"

namespace quark {
namespace {

struct Fixture {
  std::vector<RunBundle> bundles;
  Qrels qrels;
};

Fixture random_fixture(std::uint64_t seed, std::size_t queries = 30, std::size_t k = 4) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 10);
  Fixture f;
  auto run = [&](const std::string& qid) {
    std::vector<ScoredDoc> e;
    for (int d = 0; d < 20; ++d) {
      if (rng() % 3 == 0) e.push_back({"d" + std::to_string(d), u(rng)});
    }
    return RunList(qid, e);
  };
  for (std::size_t i = 0; i < queries; ++i) {
    const std::string qid = "q" + std::to_string(i);
    f.qrels.set(qid, "d" + std::to_string(rng() % 20), 1);
    RunBundle b{qid, run(qid), {}};
    for (std::size_t h = 0; h < k; ++h) b.hyp_runs.push_back(run(qid));
    f.bundles.push_back(std::move(b));
  }
  return f;
}

TEST(Experiments, SweepWithOnlyBaseline) {
  const Fixture f = random_fixture(1);
  const std::vector<double> grid{1.0};
  const auto t = sweep_alpha(f.bundles, {}, f.qrels, grid);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].key, "1");
  EXPECT_EQ(t.rows[0].d_mrr, 0.0);
  EXPECT_EQ(t.rows[0].d_ndcg, 0.0);
}

TEST(Experiments, FullSweepAppendsBaseline) {
  const Fixture f = random_fixture(2);
  const auto grid = alpha_grid();
  const auto t = sweep_alpha(f.bundles, {}, f.qrels, grid);
  ASSERT_EQ(t.rows.size(), 19u);
  EXPECT_EQ(t.baseline, 18u);
  EXPECT_EQ(t.rows[0].key, "0.1");
  EXPECT_EQ(t.rows[17].key, "0.99");
  std::vector<RunList> base;
  for (const auto& b : f.bundles) base.push_back(b.base_run.truncated(100));
  EXPECT_EQ(t.baseline_row().report, evaluate_run(base, f.qrels));
  for (const auto& r : t.rows) {
    EXPECT_DOUBLE_EQ(r.d_mrr, r.report.mrr - t.baseline_row().report.mrr);
  }
  const std::string csv = t.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "alpha,recall@1,recall@5,recall@10,mrr@10,ndcg@10,d_mrr,d_ndcg");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 20);
  EXPECT_GE(t.best_row().report.mrr, t.baseline_row().report.mrr);
}

TEST(Experiments, AlphaZeroIsMaxOverHypotheses) {
  const Fixture f = random_fixture(3);
  AggregationConfig zero;
  zero.alpha = 0.0;
  for (const auto& b : f.bundles) {
    const RunList fused = aggregate(b, zero);
    // Same bundle with the hypotheses alone, first one standing in as the base.
    RunBundle hyps{b.qid, b.hyp_runs[0], b.hyp_runs};
    AggregationConfig mx;
    mx.pooling = Pooling::kUnanchoredMax;
    const RunList pooled = pool_unanchored(hyps, Pooling::kUnanchoredMax, mx);
    std::vector<ScoredDoc> positive;
    for (const auto& e : fused.entries()) {
      if (e.score > 0) positive.push_back(e);
    }
    EXPECT_EQ(RunList(b.qid, positive), pooled);
  }
}

TEST(Experiments, AblateK) {
  const Fixture f = random_fixture(4);
  const std::vector<std::size_t> ks{0, 1, 2, 3, 4};
  const auto t = ablate_k(f.bundles, ks, {}, f.qrels);
  ASSERT_EQ(t.rows.size(), 5u);
  EXPECT_EQ(t.baseline, 0u);
  std::vector<RunList> base;
  for (const auto& b : f.bundles) base.push_back(b.base_run.truncated(100));
  EXPECT_EQ(t.rows[0].report, evaluate_run(base, f.qrels));
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    EXPECT_GE(t.rows[i].mean_candidates, t.rows[i - 1].mean_candidates);
    EXPECT_GT(t.rows[i].t_mrr.n, 0u);
  }
  const std::string csv = t.to_csv();
  EXPECT_NE(csv.find(",p_mrr,p_ndcg,candidates\n"), std::string::npos);
}

TEST(Experiments, AblateKWithoutZeroAddsBaseline) {
  const Fixture f = random_fixture(5);
  const std::vector<std::size_t> ks{2};
  const auto t = ablate_k(f.bundles, ks, {}, f.qrels);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.baseline_row().key, "0");
}

TEST(Experiments, AblateKNamesShortQuery) {
  Fixture f = random_fixture(6);
  f.bundles[7].hyp_runs.resize(2);
  const std::vector<std::size_t> ks{0, 3};
  try {
    ablate_k(f.bundles, ks, {}, f.qrels);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'q7'"), std::string::npos);
  }
}

TEST(Experiments, AblatePooling) {
  const Fixture f = random_fixture(7);
  AggregationConfig cfg;
  cfg.alpha = 0.7;
  const auto t = ablate_pooling(f.bundles, cfg, f.qrels);
  ASSERT_EQ(t.rows.size(), 5u);
  const std::vector<std::string> keys{"base", "unanchored-max", "unanchored-mean",
                                      "unanchored-median", "anchored-max-a0.7"};
  for (std::size_t i = 0; i < keys.size(); ++i) EXPECT_EQ(t.rows[i].key, keys[i]);
  EXPECT_EQ(t.baseline, 0u);
  EXPECT_EQ(t.rows[0].d_mrr, 0.0);
  EXPECT_NE(t.to_text().find("anchored-max-a0.7"), std::string::npos);
}

TEST(Experiments, ParallelMatchesSerial) {
  const Fixture f = random_fixture(8, 60);
  ExperimentOptions par;
  par.eval.jobs = 6;
  const auto grid = alpha_grid();
  EXPECT_EQ(sweep_alpha(f.bundles, {}, f.qrels, grid).to_csv(),
            sweep_alpha(f.bundles, {}, f.qrels, grid, par).to_csv());
}

TEST(Experiments, RescorerCountMustMatch) {
  const Fixture f = random_fixture(9, 3);
  const std::vector<ExactScorer> one(1);
  EXPECT_THROW(aggregate_all(f.bundles, {}, 1, one), ValidationError);
  EXPECT_THROW(sweep_alpha(f.bundles, {}, f.qrels, std::vector<double>{}), ValidationError);
}

}  // namespace
}  // namespace quark
