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

#include "quark/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "quark/error.hpp"
#include "quark/io.hpp"
#include "quark/parallel.hpp"

namespace quark {

Metric parse_metric(std::string_view name) {
  if (name == "recall") return Metric::kRecall;
  if (name == "mrr") return Metric::kMrr;
  if (name == "ndcg") return Metric::kNdcg;
  throw ValidationError("unknown metric '" + std::string(name) + "'");
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::kRecall: return "recall";
    case Metric::kMrr: return "mrr";
    case Metric::kNdcg: return "ndcg";
  }
  return "mrr";
}

namespace {

void check_cutoff(std::size_t m) {
  if (m == 0) throw ValidationError("metric cutoff must be >= 1");
}

std::size_t top(const RunList& run, std::size_t m) { return std::min(m, run.size()); }

}  // namespace

std::optional<double> recall_at(const RunList& run, const Qrels& qrels, std::size_t m) {
  check_cutoff(m);
  const std::size_t total = qrels.relevant_count(run.qid());
  if (total == 0) return std::nullopt;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < top(run, m); ++i) {
    if (qrels.grade(run.qid(), run[i].doc_id) > 0) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(total);
}

std::optional<double> mrr_at(const RunList& run, const Qrels& qrels, std::size_t m) {
  check_cutoff(m);
  if (qrels.relevant_count(run.qid()) == 0) return std::nullopt;
  for (std::size_t i = 0; i < top(run, m); ++i) {
    if (qrels.grade(run.qid(), run[i].doc_id) > 0) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

std::optional<double> ndcg_at(const RunList& run, const Qrels& qrels, std::size_t m) {
  check_cutoff(m);
  if (qrels.relevant_count(run.qid()) == 0) return std::nullopt;
  auto gain = [](int g) { return std::exp2(static_cast<double>(g)) - 1.0; };
  double dcg = 0.0;
  for (std::size_t i = 0; i < top(run, m); ++i) {
    dcg += gain(qrels.grade(run.qid(), run[i].doc_id)) / std::log2(static_cast<double>(i + 2));
  }
  std::vector<int> grades;
  for (const auto& [doc, g] : *qrels.judgments(run.qid())) grades.push_back(g);
  std::sort(grades.begin(), grades.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(m, grades.size()); ++i) {
    idcg += gain(grades[i]) / std::log2(static_cast<double>(i + 2));
  }
  return dcg / idcg;
}

std::optional<double> metric_at(Metric metric, const RunList& run, const Qrels& qrels,
                                std::size_t m) {
  switch (metric) {
    case Metric::kRecall: return recall_at(run, qrels, m);
    case Metric::kMrr: return mrr_at(run, qrels, m);
    case Metric::kNdcg: return ndcg_at(run, qrels, m);
  }
  return std::nullopt;
}

namespace {

// Runs for every query of the universe in sorted qid order; absent runs are
// empty.
std::vector<RunList> align_runs(std::span<const RunList> runs,
                                const std::vector<std::string>* universe) {
  std::map<std::string, const RunList*> by_qid;
  for (const auto& r : runs) {
    if (!by_qid.emplace(r.qid(), &r).second) {
      throw ValidationError("duplicate run for query '" + r.qid() + "'");
    }
  }
  std::vector<std::string> qids;
  if (universe != nullptr) {
    qids = *universe;
    std::sort(qids.begin(), qids.end());
    qids.erase(std::unique(qids.begin(), qids.end()), qids.end());
  } else {
    for (const auto& [qid, run] : by_qid) qids.push_back(qid);
  }
  std::vector<RunList> out;
  out.reserve(qids.size());
  for (const auto& qid : qids) {
    auto it = by_qid.find(qid);
    out.push_back(it == by_qid.end() ? RunList(qid) : *it->second);
  }
  return out;
}

double mean_of(const std::map<std::string, double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [qid, v] : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

MetricResult evaluate_metric(std::span<const RunList> runs, const Qrels& qrels, Metric metric,
                             std::size_t m, const std::vector<std::string>* universe) {
  check_cutoff(m);
  MetricResult out;
  out.metric = metric;
  out.cutoff = m;
  for (const auto& run : align_runs(runs, universe)) {
    const auto v = metric_at(metric, run, qrels, m);
    if (v) {
      out.per_query.emplace(run.qid(), *v);
    } else {
      ++out.excluded;
    }
  }
  out.mean = mean_of(out.per_query);
  return out;
}

std::vector<std::string> EvalReport::column_names() const {
  std::vector<std::string> cols;
  for (std::size_t m : recall_cutoffs) cols.push_back("recall@" + std::to_string(m));
  cols.push_back("mrr@" + std::to_string(rank_cutoff));
  cols.push_back("ndcg@" + std::to_string(rank_cutoff));
  return cols;
}

std::vector<double> EvalReport::values() const {
  std::vector<double> v = recall;
  v.push_back(mrr);
  v.push_back(ndcg);
  return v;
}

std::string EvalReport::to_csv() const {
  std::string out;
  const auto cols = column_names();
  for (const auto& c : cols) out += c + ",";
  out += "evaluated,excluded\n";
  for (double v : values()) out += format_score(v) + ",";
  out += std::to_string(evaluated) + "," + std::to_string(excluded) + "\n";
  return out;
}

std::string EvalReport::to_text() const {
  std::string out;
  const auto cols = column_names();
  const auto vals = values();
  char buf[64];
  for (std::size_t i = 0; i < cols.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%-12s %.4f\n", cols[i].c_str(), vals[i]);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "%-12s %zu\n%-12s %zu\n", "evaluated", evaluated, "excluded",
                excluded);
  out += buf;
  return out;
}

EvalReport evaluate_run(std::span<const RunList> runs, const Qrels& qrels,
                        const EvalOptions& opts, const std::vector<std::string>* universe) {
  for (std::size_t m : opts.recall_cutoffs) check_cutoff(m);
  check_cutoff(opts.rank_cutoff);
  const std::vector<RunList> aligned = align_runs(runs, universe);
  bool overlap = false;
  for (const auto& r : aligned) overlap = overlap || qrels.has_query(r.qid());
  if (!overlap) throw ValidationError("run and qrels share no query");

  const std::size_t nq = aligned.size();
  const std::size_t nr = opts.recall_cutoffs.size();
  // Row per query: recall values, mrr, ndcg; empty when excluded.
  std::vector<std::vector<double>> rows(nq);
  parallel_for(nq, opts.jobs, [&](std::size_t i) {
    const RunList& run = aligned[i];
    if (qrels.relevant_count(run.qid()) == 0) return;
    std::vector<double> row;
    for (std::size_t m : opts.recall_cutoffs) row.push_back(*recall_at(run, qrels, m));
    row.push_back(*mrr_at(run, qrels, opts.rank_cutoff));
    row.push_back(*ndcg_at(run, qrels, opts.rank_cutoff));
    rows[i] = std::move(row);
  });

  EvalReport rep;
  rep.recall_cutoffs = opts.recall_cutoffs;
  rep.rank_cutoff = opts.rank_cutoff;
  std::vector<std::map<std::string, double>> recall_maps(nr);
  for (std::size_t i = 0; i < nq; ++i) {
    if (rows[i].empty()) {
      ++rep.excluded;
      continue;
    }
    ++rep.evaluated;
    const std::string& qid = aligned[i].qid();
    for (std::size_t c = 0; c < nr; ++c) recall_maps[c].emplace(qid, rows[i][c]);
    rep.mrr_per_query.emplace(qid, rows[i][nr]);
    rep.ndcg_per_query.emplace(qid, rows[i][nr + 1]);
  }
  for (const auto& m : recall_maps) rep.recall.push_back(mean_of(m));
  rep.mrr = mean_of(rep.mrr_per_query);
  rep.ndcg = mean_of(rep.ndcg_per_query);
  return rep;
}

PairedTestResult paired_ttest(const std::map<std::string, double>& a,
                              const std::map<std::string, double>& b) {
  std::vector<double> xa;
  std::vector<double> xb;
  for (const auto& [qid, v] : a) {
    auto it = b.find(qid);
    if (it == b.end()) continue;
    xa.push_back(v);
    xb.push_back(it->second);
  }
  return paired_ttest(std::span<const double>(xa), std::span<const double>(xb));
}

}  // namespace quark
