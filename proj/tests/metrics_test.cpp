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

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "quark/error.hpp"
#include "quark/io.hpp"
#include "quark/metrics.hpp"
#include "test_util.hpp"

namespace quark {
namespace {

using testing::make_run;

Qrels qrels_of(std::vector<std::tuple<std::string, std::string, int>> rows) {
  Qrels q;
  for (const auto& [qid, doc, g] : rows) q.set(qid, doc, g);
  return q;
}

TEST(Metrics, SingleRelevantAtRankTwo) {
  const Qrels q = qrels_of({{"q", "d2", 1}});
  const RunList r = make_run("q", {{"d1", 0.9}, {"d2", 0.8}, {"d3", 0.7}});
  EXPECT_EQ(*recall_at(r, q, 1), 0.0);
  EXPECT_EQ(*recall_at(r, q, 2), 1.0);
  EXPECT_EQ(*mrr_at(r, q, 10), 0.5);
  EXPECT_EQ(*mrr_at(r, q, 1), 0.0);
  EXPECT_NEAR(*ndcg_at(r, q, 10), 0.6309297535714575, 1e-15);
}

TEST(Metrics, GradedNdcg) {
  const Qrels q = qrels_of({{"q", "d1", 2}, {"q", "d2", 1}, {"q", "d3", 0}});
  const RunList r = make_run("q", {{"d2", 3}, {"d3", 2}, {"d1", 1}});
  EXPECT_NEAR(*ndcg_at(r, q, 10), 0.6885288809404666, 1e-15);
  EXPECT_NEAR(*ndcg_at(r, q, 2), 0.27541155237618664, 1e-15);
  EXPECT_NEAR(*recall_at(r, q, 1), 0.5, 1e-15);
  const Qrels two = qrels_of({{"q", "d1", 2}, {"q", "d2", 1}});
  EXPECT_NEAR(*ndcg_at(make_run("q", {{"d2", 2}, {"d1", 1}}), two, 2), 0.7967075809905066, 1e-15);
}

TEST(Metrics, NoPositivesIsUndefined) {
  const Qrels q = qrels_of({{"q", "d1", 0}});
  const RunList r = make_run("q", {{"d1", 1}});
  EXPECT_FALSE(recall_at(r, q, 5));
  EXPECT_FALSE(mrr_at(r, q, 5));
  EXPECT_FALSE(ndcg_at(r, q, 5));
  EXPECT_FALSE(mrr_at(make_run("other", {}), q, 5));
  EXPECT_THROW(mrr_at(r, q, 0), ValidationError);
}

TEST(Metrics, EmptyRunScoresZero) {
  const Qrels q = qrels_of({{"q", "d1", 1}});
  EXPECT_EQ(*mrr_at(RunList("q"), q, 10), 0.0);
  EXPECT_EQ(*ndcg_at(RunList("q"), q, 10), 0.0);
  EXPECT_EQ(*recall_at(RunList("q"), q, 10), 0.0);
}

struct Reference {
  double recall, mrr, ndcg;
};

// Recomputes the three metrics from a ranking and the judgments directly.
Reference reference(const std::vector<std::string>& ranking, const std::map<std::string, int>& judged,
                    std::size_t m) {
  std::size_t positives = 0;
  std::vector<int> grades;
  for (const auto& [d, g] : judged) {
    positives += g > 0;
    grades.push_back(g);
  }
  Reference ref{0, 0, 0};
  double dcg = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranking.size() && i < m; ++i) {
    auto it = judged.find(ranking[i]);
    const int g = it == judged.end() ? 0 : it->second;
    if (g > 0) {
      ++hits;
      if (ref.mrr == 0) ref.mrr = 1.0 / static_cast<double>(i + 1);
    }
    dcg += (std::pow(2.0, g) - 1) / std::log2(static_cast<double>(i) + 2);
  }
  std::sort(grades.rbegin(), grades.rend());
  double idcg = 0;
  for (std::size_t i = 0; i < grades.size() && i < m; ++i) {
    idcg += (std::pow(2.0, grades[i]) - 1) / std::log2(static_cast<double>(i) + 2);
  }
  ref.recall = static_cast<double>(hits) / static_cast<double>(positives);
  ref.ndcg = dcg / idcg;
  return ref;
}

TEST(Metrics, MatchReferenceOnRandomInstances) {
  std::mt19937_64 rng(41);
  int checked = 0;
  while (checked < 300) {
    std::map<std::string, int> judged;
    for (int d = 0; d < 15; ++d) {
      if (rng() % 3 == 0) judged["d" + std::to_string(d)] = static_cast<int>(rng() % 4);
    }
    Qrels q;
    for (const auto& [d, g] : judged) q.set("q", d, g);
    std::vector<ScoredDoc> entries;
    for (int d = 0; d < 15; ++d) {
      if (rng() % 2) entries.push_back({"d" + std::to_string(d), static_cast<double>(rng() % 5)});
    }
    const RunList run("q", entries);
    std::vector<std::string> ranking;
    for (const auto& e : run.entries()) ranking.push_back(e.doc_id);
    const std::size_t m = 1 + rng() % 12;
    const auto rec = recall_at(run, q, m);
    if (q.relevant_count("q") == 0) {
      EXPECT_FALSE(rec);
      continue;
    }
    const Reference ref = reference(ranking, judged, m);
    EXPECT_NEAR(*rec, ref.recall, 1e-12);
    EXPECT_NEAR(*mrr_at(run, q, m), ref.mrr, 1e-12);
    EXPECT_NEAR(*ndcg_at(run, q, m), ref.ndcg, 1e-12);
    for (double v : {*rec, *mrr_at(run, q, m), *ndcg_at(run, q, m)}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0 + 1e-12);
    }
    ++checked;
  }
}

TEST(Metrics, RecallAndMrrGrowWithCutoff) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    Qrels q;
    q.set("q", "d" + std::to_string(rng() % 20), 1);
    q.set("q", "d" + std::to_string(rng() % 20), 2);
    std::vector<ScoredDoc> entries;
    for (int d = 0; d < 20; ++d) entries.push_back({"d" + std::to_string(d), static_cast<double>(rng() % 100)});
    const RunList run("q", entries);
    for (std::size_t m = 1; m < 25; ++m) {
      EXPECT_LE(*recall_at(run, q, m), *recall_at(run, q, m + 1));
      EXPECT_LE(*mrr_at(run, q, m), *mrr_at(run, q, m + 1));
    }
  }
}

TEST(Metrics, StableUnderReserialization) {
  std::mt19937_64 rng(43);
  std::vector<RunList> runs;
  Qrels q;
  for (int i = 0; i < 20; ++i) {
    const std::string qid = "q" + std::to_string(i);
    q.set(qid, "d" + std::to_string(rng() % 10), 1);
    std::vector<ScoredDoc> entries;
    for (int d = 0; d < 10; ++d) {
      entries.push_back({"d" + std::to_string(d), std::uniform_real_distribution<double>(-5, 5)(rng)});
    }
    runs.emplace_back(qid, entries);
  }
  const auto back = parse_run(format_run(runs, "t"));
  EXPECT_EQ(evaluate_run(runs, q), evaluate_run(back, q));
}

TEST(Metrics, EvaluateRun) {
  const Qrels q = qrels_of({{"a", "d1", 1}, {"b", "d2", 1}, {"c", "d1", 0}});
  const std::vector<RunList> runs{make_run("a", {{"d1", 2}, {"d2", 1}}),
                                  make_run("b", {{"d1", 2}, {"d2", 1}}),
                                  make_run("c", {{"d1", 1}})};
  EvalOptions opts;
  opts.recall_cutoffs = {1, 2};
  opts.rank_cutoff = 10;
  const EvalReport rep = evaluate_run(runs, q, opts);
  EXPECT_EQ(rep.evaluated, 2u);
  EXPECT_EQ(rep.excluded, 1u);
  EXPECT_DOUBLE_EQ(rep.recall[0], 0.5);
  EXPECT_DOUBLE_EQ(rep.recall[1], 1.0);
  EXPECT_DOUBLE_EQ(rep.mrr, 0.75);
  EXPECT_EQ(rep.mrr_per_query.at("b"), 0.5);
  EXPECT_EQ(rep.column_names(), (std::vector<std::string>{"recall@1", "recall@2", "mrr@10", "ndcg@10"}));
  EXPECT_EQ(rep.to_csv().substr(0, rep.to_csv().find('\n')),
            "recall@1,recall@2,mrr@10,ndcg@10,evaluated,excluded");
  EXPECT_NE(rep.to_text().find("mrr@10"), std::string::npos);

  opts.jobs = 4;
  EXPECT_EQ(evaluate_run(runs, q, opts), rep);

  // A query without a run counts as an empty run.
  const std::vector<std::string> universe{"a", "b", "c", "d"};
  const Qrels q2 = qrels_of({{"a", "d1", 1}, {"d", "d1", 1}});
  const EvalReport withd = evaluate_run(runs, q2, opts, &universe);
  EXPECT_EQ(withd.evaluated, 2u);
  EXPECT_DOUBLE_EQ(withd.mrr, 0.5);
}

TEST(Metrics, EvaluateRunErrors) {
  const Qrels q = qrels_of({{"x", "d1", 1}});
  const std::vector<RunList> runs{make_run("a", {{"d1", 1}})};
  EXPECT_THROW(evaluate_run(runs, q), ValidationError);
  const std::vector<RunList> dup{make_run("x", {{"d1", 1}}), make_run("x", {{"d2", 1}})};
  EXPECT_THROW(evaluate_run(dup, q), ValidationError);
  EvalOptions bad;
  bad.rank_cutoff = 0;
  EXPECT_THROW(evaluate_run(std::vector<RunList>{make_run("x", {})}, q, bad), ValidationError);
}

TEST(Metrics, EvaluateMetricAndTTest) {
  const Qrels q = qrels_of({{"a", "d1", 1}, {"b", "d1", 1}, {"c", "d1", 1}});
  const std::vector<RunList> good{make_run("a", {{"d1", 1}}), make_run("b", {{"d1", 1}}),
                                  make_run("c", {{"d2", 2}, {"d1", 1}})};
  const std::vector<RunList> bad{make_run("a", {{"d2", 2}, {"d1", 1}}), make_run("b", {{"d2", 1}}),
                                 make_run("c", {{"d2", 2}, {"d1", 1}})};
  const auto mg = evaluate_metric(good, q, Metric::kMrr, 10);
  const auto mb = evaluate_metric(bad, q, Metric::kMrr, 10);
  EXPECT_DOUBLE_EQ(mg.mean, 2.5 / 3);
  EXPECT_DOUBLE_EQ(mb.mean, 1.0 / 3);
  const auto t = paired_ttest(mg.per_query, mb.per_query);
  EXPECT_EQ(t.n, 3u);
  EXPECT_DOUBLE_EQ(t.mean_diff, 0.5);
  EXPECT_EQ(parse_metric("ndcg"), Metric::kNdcg);
  EXPECT_THROW(parse_metric("map"), ValidationError);
}

}  // namespace
}  // namespace quark
