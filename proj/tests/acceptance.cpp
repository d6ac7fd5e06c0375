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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>
#include <unistd.h>

#include "quark/aggregation.hpp"
#include "quark/experiments.hpp"
#include "quark/faithfulness.hpp"
#include "quark/hypothesis.hpp"
#include "quark/io.hpp"
#include "quark/lexical.hpp"
#include "quark/metrics.hpp"
#include "quark/pipeline.hpp"
#include "quark/retriever.hpp"
#include "quark/simulation.hpp"
#include "quark/stats.hpp"
#include "quark/utf8.hpp"

namespace fs = std::filesystem;
using namespace quark;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int n, bool ok, const std::string& what, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", n, what.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

// Guards a criterion body so one exception fails only that criterion.
void run(int n, const std::string& what, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [ok, detail] = body();
    report(n, ok, what, detail);
  } catch (const std::exception& e) {
    report(n, false, what, std::string("exception: ") + e.what());
  }
}

RunList random_run(std::mt19937_64& rng, const std::string& qid) {
  std::uniform_real_distribution<double> u(-5, 20);
  std::vector<ScoredDoc> e;
  std::set<std::string> used;
  const std::size_t n = rng() % 40;
  for (std::size_t i = 0; i < n; ++i) {
    std::string id = "d" + std::to_string(rng() % 60);
    // Coarse scores so ties are common.
    if (used.insert(id).second) e.push_back({id, rng() % 4 == 0 ? std::round(u(rng)) : u(rng)});
  }
  return RunList(qid, e);
}

RunBundle random_bundle(std::mt19937_64& rng) {
  RunBundle b{"q", random_run(rng, "q"), {}};
  const std::size_t k = rng() % 7;
  for (std::size_t i = 0; i < k; ++i) b.hyp_runs.push_back(random_run(rng, "q"));
  return b;
}

// ---- criterion 1 ----
std::pair<bool, std::string> alpha_one_identity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  AggregationConfig cfg;
  cfg.alpha = 1.0;
  cfg.output_depth = 1000;
  int bad = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const RunBundle b = random_bundle(rng);
    if (!(aggregate(b, cfg) == b.base_run)) ++bad;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 5.0,
          std::to_string(n) + " bundles, " + std::to_string(bad) + " mismatches, " +
              fmt("%.2f s < 5 s", secs)};
}

// ---- criterion 2 ----
std::pair<bool, std::string> formula_equivalence() {
  std::mt19937_64 rng(202);
  const int n = 2000;
  double worst = 0.0;
  int bad_sets = 0;
  int bad_order = 0;
  for (int i = 0; i < n; ++i) {
    const RunBundle b = random_bundle(rng);
    AggregationConfig cfg;
    cfg.alpha = static_cast<double>(rng() % 101) / 100.0;
    cfg.output_depth = 1000;
    const RunList got = aggregate(b, cfg);
    std::vector<ScoredDoc> expect;
    // Both degenerate cases reduce to the base run by definition.
    if (b.hyp_runs.empty() || cfg.alpha == 1.0) {
      expect.assign(b.base_run.entries().begin(), b.base_run.entries().end());
    } else {
      std::set<std::string> docs;
      for (const auto& e : b.base_run.entries()) docs.insert(e.doc_id);
      for (const auto& r : b.hyp_runs)
        for (const auto& e : r.entries()) docs.insert(e.doc_id);
      for (const auto& d : docs) {
        const double s0 = b.base_run.score_of(d).value_or(0.0);
        double best = -INFINITY;
        for (const auto& r : b.hyp_runs) best = std::max(best, r.score_of(d).value_or(0.0));
        expect.push_back({d, cfg.alpha * s0 + (1 - cfg.alpha) * best});
      }
    }
    if (got.size() != expect.size()) {
      ++bad_sets;
      continue;
    }
    for (const auto& e : expect) {
      const auto s = got.score_of(e.doc_id);
      if (!s) {
        ++bad_sets;
        break;
      }
      worst = std::max(worst, std::fabs(*s - e.score));
    }
    for (std::size_t j = 1; j < got.size(); ++j) {
      if (got[j - 1].score < got[j].score ||
          (got[j - 1].score == got[j].score && got[j - 1].doc_id > got[j].doc_id)) {
        ++bad_order;
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d bundles, max |diff| %.3g <= 1e-12, %d set / %d order errors",
                n, worst, bad_sets, bad_order);
  return {worst <= 1e-12 && bad_sets == 0 && bad_order == 0, buf};
}

// ---- criterion 3 ----
std::pair<bool, std::string> metric_oracles() {
  std::mt19937_64 rng(303);
  int instances = 0;
  double worst = 0.0;
  while (instances < 500) {
    Qrels q;
    std::map<std::string, int> judged;
    for (int d = 0; d < 12; ++d) {
      if (rng() % 3 == 0) {
        const int g = static_cast<int>(rng() % 4);
        judged["d" + std::to_string(d)] = g;
        q.set("q", "d" + std::to_string(d), g);
      }
    }
    std::vector<ScoredDoc> entries;
    for (int d = 0; d < 12; ++d) {
      if (rng() % 2) entries.push_back({"d" + std::to_string(d), static_cast<double>(rng() % 5)});
    }
    const RunList run("q", entries);
    const std::size_t m = 1 + rng() % 12;
    std::size_t positives = 0;
    for (const auto& [d, g] : judged) positives += g > 0;
    if (positives == 0) continue;
    ++instances;
    // Brute force: enumerate the ranked list position by position.
    double hits = 0, rr = 0, dcg = 0;
    for (std::size_t i = 0; i < std::min(m, run.size()); ++i) {
      auto it = judged.find(run[i].doc_id);
      const int g = it == judged.end() ? 0 : it->second;
      if (g > 0) {
        hits += 1;
        if (rr == 0) rr = 1.0 / static_cast<double>(i + 1);
      }
      dcg += (std::pow(2.0, g) - 1) / std::log2(static_cast<double>(i + 2));
    }
    std::vector<int> grades;
    for (const auto& [d, g] : judged) grades.push_back(g);
    std::sort(grades.rbegin(), grades.rend());
    double idcg = 0;
    for (std::size_t i = 0; i < std::min(m, grades.size()); ++i) {
      idcg += (std::pow(2.0, grades[i]) - 1) / std::log2(static_cast<double>(i + 2));
    }
    worst = std::max({worst, std::fabs(*recall_at(run, q, m) - hits / static_cast<double>(positives)),
                      std::fabs(*mrr_at(run, q, m) - rr), std::fabs(*ndcg_at(run, q, m) - dcg / idcg)});
  }
  // Reference values computed by tests/oracle/derive.py.
  Qrels one;
  one.set("q", "d2", 1);
  const double n1 = *ndcg_at(RunList("q", {{"d1", 2}, {"d2", 1}}), one, 10);
  Qrels two;
  two.set("q", "d1", 2);
  two.set("q", "d2", 1);
  const double n2 = *ndcg_at(RunList("q", {{"d2", 2}, {"d1", 1}}), two, 2);
  const std::vector<double> a{2, 4, 6, 8}, b{1, 2, 3, 4};
  const auto t = paired_ttest(std::span<const double>(a), std::span<const double>(b));
  const bool derived = std::fabs(n1 - 0.6309297535714575) < 1e-12 &&
                       std::fabs(n2 - 0.7967075809905066) < 1e-12 &&
                       std::fabs(t.t_stat - 3.872983346207417) < 1e-12 &&
                       std::fabs(t.p_value - 0.030466291662170977) < 1e-10;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "%d instances, max |diff| %.3g <= 1e-12; ndcg %.4f / %.4f, t %.4f p %.4f", instances,
                worst, n1, n2, t.t_stat, t.p_value);
  return {worst <= 1e-12 && derived, buf};
}

// ---- criterion 4 ----
std::pair<bool, std::string> faithfulness_oracles() {
  std::mt19937_64 rng(404);
  const std::u32string alphabet = U"abcd月亮心爱";
  int mismatches = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    auto draw = [&] {
      std::u32string s(1 + rng() % 40, U'a');
      for (auto& c : s) c = alphabet[rng() % (rng() % 2 ? 3 : alphabet.size())];
      return s;
    };
    const std::u32string x = draw(), y = draw();
    const std::size_t nx = x.size(), ny = y.size();
    std::vector<std::vector<std::size_t>> ed(nx + 1, std::vector<std::size_t>(ny + 1));
    std::vector<std::vector<std::size_t>> seq(nx + 1, std::vector<std::size_t>(ny + 1));
    std::vector<std::vector<std::size_t>> sub(nx + 1, std::vector<std::size_t>(ny + 1));
    std::size_t longest = 0;
    for (std::size_t p = 0; p <= nx; ++p) ed[p][0] = p;
    for (std::size_t r = 0; r <= ny; ++r) ed[0][r] = r;
    for (std::size_t p = 1; p <= nx; ++p) {
      for (std::size_t r = 1; r <= ny; ++r) {
        const bool same = x[p - 1] == y[r - 1];
        ed[p][r] = std::min({ed[p - 1][r] + 1, ed[p][r - 1] + 1, ed[p - 1][r - 1] + (same ? 0 : 1)});
        seq[p][r] = same ? seq[p - 1][r - 1] + 1 : std::max(seq[p - 1][r], seq[p][r - 1]);
        sub[p][r] = same ? sub[p - 1][r - 1] + 1 : 0;
        longest = std::max(longest, sub[p][r]);
      }
    }
    const double editsim =
        1.0 - static_cast<double>(ed[nx][ny]) / static_cast<double>(std::max(nx, ny));
    const double lcs = static_cast<double>(seq[nx][ny]);
    const double prec = lcs / static_cast<double>(nx), rec = lcs / static_cast<double>(ny);
    const double f1 = lcs == 0 ? 0.0 : 2 * prec * rec / (prec + rec);
    const auto s = faithfulness(utf8::encode(x), utf8::encode(y));
    if (std::fabs(s.edit_sim - editsim) > 1e-12 || std::fabs(s.rouge_l_char_f1 - f1) > 1e-12 ||
        s.lcs_len != longest || s.len_q != nx || s.len_target != ny) {
      ++mismatches;
    }
  }
  return {mismatches == 0,
          std::to_string(n) + " pairs (lengths 1..40), " + std::to_string(mismatches) + " mismatches"};
}

// ---- criterion 5 ----
std::pair<bool, std::string> corruptor_calibration() {
  const auto t0 = Clock::now();
  const Corpus corpus = synth_corpus(SyntheticCorpusConfig{});
  const struct {
    const char* name;
    double target;
  } levels[] = {{"L1", 0.881}, {"L2", 0.754}, {"L3", 0.269}};
  std::vector<double> means;
  bool within = true;
  std::string detail;
  for (const auto& l : levels) {
    SimulationConfig cfg;
    cfg.queries = 1000;
    cfg.level = noise_level(l.name);
    cfg.seed = 505;
    const Benchmark b = simulate(corpus, cfg);
    const double m = b.report.edit_sim.mean;
    means.push_back(m);
    within = within && std::fabs(m - l.target) <= 0.08;
    detail += std::string(l.name) + fmt(" %.4f", m) + fmt(" (target %.3f), ", l.target);
  }
  const double secs = seconds_since(t0);
  const bool ordered = means[0] > means[1] && means[1] > means[2];
  return {ordered && within && secs < 30.0, detail + fmt("%.2f s < 30 s", secs)};
}

// ---- desk-scale benchmark shared by criteria 6-8 ----
struct Desk {
  std::vector<RunBundle> bundles;
  Qrels qrels;
  double build_seconds = 0.0;
};

Desk build_desk(std::uint64_t seed) {
  const auto t0 = Clock::now();
  Desk d;
  SyntheticCorpusConfig cc;
  cc.docs = 2000;
  cc.seed = seed;
  const Corpus corpus = synth_corpus(cc);
  SimulationConfig sc;
  sc.queries = 200;
  sc.level = noise_level("L2");
  sc.seed = seed + 1000;
  Benchmark bench = simulate(corpus, sc);
  const OracleCorruptorProvider provider(5, noise_level("H"), seed + 2000);
  const auto hyps = generate_all(provider, bench.queries, 4);
  for (std::size_t i = 0; i < hyps.size(); ++i) bench.queries[i].hypotheses = hyps[i];
  const LexicalIndex index = LexicalIndex::build(corpus, Tokenizer{});
  const LexicalRetriever retriever(index);
  d.bundles = retrieve_bundles(retriever, bench.queries, default_depth(10), 4);
  d.qrels = bench.qrels;
  d.build_seconds = seconds_since(t0);
  return d;
}

// ---- criterion 9 ----
std::pair<bool, std::string> pipeline_determinism() {
  const fs::path root = fs::temp_directory_path() / ("quark-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);
  auto config = [&](const std::string& name) {
    ConfigMap m;
    m.set("seed", "7");
    m.set("output_dir", (root / name).string());
    m.set("synth.docs", "2000");
    m.set("simulate.queries", "200");
    m.set("simulate.level", "L2");
    m.set("provider", "oracle");
    m.set("k", "5");
    m.set("ablate_k", "0,1,2,3,4,5");
    return PipelineConfig::from_map(m);
  };
  const PipelineResult a = run_pipeline(config("a"));
  const PipelineResult b = run_pipeline(config("b"));
  if (!a.ok || !b.ok) {
    fs::remove_all(root);
    return {false, "pipeline failed: " + a.error + b.error};
  }
  int compared = 0;
  std::vector<std::string> differing;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    ++compared;
    if (!fs::exists(root / "b" / name) || read_file(entry.path()) != read_file(root / "b" / name)) {
      differing.push_back(name);
    }
  }
  fs::remove_all(root);
  std::string detail = std::to_string(compared) + " artifacts compared byte for byte";
  for (const auto& n : differing) detail += ", differs: " + n;
  return {differing.empty() && compared >= 10, detail};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  run(1, "alpha = 1 returns the base run", alpha_one_identity);
  run(2, "aggregation matches the straight-line formula", formula_equivalence);
  run(3, "metrics match brute force and reference values", metric_oracles);
  run(4, "faithfulness matches DP references", faithfulness_oracles);
  run(5, "corruptor presets calibrated and ordered", corruptor_calibration);

  const std::uint64_t seed = 7;
  std::optional<Desk> desk;
  std::string desk_error;
  try {
    desk.emplace(build_desk(seed));
  } catch (const std::exception& e) {
    desk_error = e.what();
  }
  AggregationConfig cfg;
  cfg.alpha = 0.8;
  ExperimentOptions opts;
  opts.eval.jobs = 4;

  run(6, "desk scale: anchored >= base, unanchored mean/median < anchored", [&] {
    if (!desk) return std::make_pair(false, "benchmark failed: " + desk_error);
    const auto t0 = Clock::now();
    const ExperimentTable t = ablate_pooling(desk->bundles, cfg, desk->qrels, opts);
    const double secs = desk->build_seconds + seconds_since(t0);
    const double base = t.rows[0].report.mrr, mean = t.rows[2].report.mrr,
                 median = t.rows[3].report.mrr, anchored = t.rows[4].report.mrr;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "MRR@10 base %.4f anchored %.4f mean %.4f median %.4f max %.4f, %.1f s < 120 s",
                  base, anchored, mean, median, t.rows[1].report.mrr, secs);
    return std::make_pair(anchored >= base && mean < anchored && median < anchored && secs < 120.0,
                          std::string(buf));
  });

  run(7, "K = 0 equals base; K in 1..5 varies < 0.05 MRR", [&] {
    if (!desk) return std::make_pair(false, "benchmark failed: " + desk_error);
    const std::vector<std::size_t> ks{0, 1, 2, 3, 4, 5};
    const ExperimentTable t = ablate_k(desk->bundles, ks, cfg, desk->qrels, opts);
    std::vector<RunList> base;
    for (const auto& b : desk->bundles) base.push_back(b.base_run.truncated(cfg.output_depth));
    std::vector<std::string> universe;
    for (const auto& b : desk->bundles) universe.push_back(b.qid);
    const bool identical = t.rows[0].report == evaluate_run(base, desk->qrels, opts.eval, &universe);
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
      lo = std::min(lo, t.rows[i].report.mrr);
      hi = std::max(hi, t.rows[i].report.mrr);
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "K=0 %s base, MRR range over K=1..5 %.4f < 0.05",
                  identical ? "==" : "!=", hi - lo);
    return std::make_pair(identical && hi - lo < 0.05, std::string(buf));
  });

  run(8, "alpha sweep peaks strictly inside (0, 1), alpha = 0.1 below the peak", [&] {
    if (!desk) return std::make_pair(false, "benchmark failed: " + desk_error);
    const auto grid = alpha_grid();
    const ExperimentTable t = sweep_alpha(desk->bundles, cfg, desk->qrels, grid, opts);
    const ExperimentRow& best = t.best_row();
    const double best_alpha = std::stod(best.key);
    const ExperimentRow& low = t.rows.front();
    char buf[160];
    std::snprintf(buf, sizeof(buf), "best alpha %s (d_mrr %+.4f), alpha %s d_mrr %+.4f",
                  best.key.c_str(), best.d_mrr, low.key.c_str(), low.d_mrr);
    return std::make_pair(best_alpha > 0.0 && best_alpha < 1.0 && low.key == "0.1" &&
                              low.d_mrr < best.d_mrr,
                          std::string(buf));
  });

  run(9, "pipeline reruns are byte-identical", pipeline_determinism);

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
