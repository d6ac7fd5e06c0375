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

#include "quark/experiments.hpp"

#include <cstdio>
#include <unordered_set>

#include "quark/error.hpp"
#include "quark/io.hpp"
#include "quark/parallel.hpp"

namespace quark {

namespace {

std::vector<std::string> bundle_qids(std::span<const RunBundle> bundles) {
  std::vector<std::string> qids;
  qids.reserve(bundles.size());
  for (const auto& b : bundles) qids.push_back(b.qid);
  return qids;
}

double mean_candidates(std::span<const RunBundle> bundles) {
  if (bundles.empty()) return 0.0;
  double total = 0.0;
  for (const auto& b : bundles) {
    std::unordered_set<std::string_view> seen;
    for (const auto& e : b.base_run.entries()) seen.insert(e.doc_id);
    for (const auto& r : b.hyp_runs) {
      for (const auto& e : r.entries()) seen.insert(e.doc_id);
    }
    total += static_cast<double>(seen.size());
  }
  return total / static_cast<double>(bundles.size());
}

ExperimentRow make_row(std::string key, std::span<const RunBundle> bundles,
                       const AggregationConfig& cfg, const Qrels& qrels,
                       const ExperimentOptions& opts) {
  const auto runs = aggregate_all(bundles, cfg, opts.eval.jobs, opts.rescorers);
  const auto universe = bundle_qids(bundles);
  ExperimentRow row;
  row.key = std::move(key);
  row.report = evaluate_run(runs, qrels, opts.eval, &universe);
  return row;
}

void fill_deltas(ExperimentTable& table) {
  const EvalReport& base = table.rows.at(table.baseline).report;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    ExperimentRow& row = table.rows[i];
    row.d_mrr = row.report.mrr - base.mrr;
    row.d_ndcg = row.report.ndcg - base.ndcg;
    if (!table.with_pvalues || i == table.baseline || base.mrr_per_query.size() < 2) continue;
    row.t_mrr = paired_ttest(row.report.mrr_per_query, base.mrr_per_query);
    row.t_ndcg = paired_ttest(row.report.ndcg_per_query, base.ndcg_per_query);
  }
}

}  // namespace

const ExperimentRow& ExperimentTable::best_row() const {
  if (rows.empty()) throw ValidationError("empty experiment table");
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].report.mrr > rows[best].report.mrr) best = i;
  }
  return rows[best];
}

std::string ExperimentTable::to_csv() const {
  std::string out = key_column;
  if (!rows.empty()) {
    for (const auto& c : rows.front().report.column_names()) out += "," + c;
  }
  out += ",d_mrr,d_ndcg";
  if (with_pvalues) out += ",p_mrr,p_ndcg";
  if (with_candidates) out += ",candidates";
  out += "\n";
  for (const auto& r : rows) {
    out += r.key;
    for (double v : r.report.values()) out += "," + format_score(v);
    out += "," + format_score(r.d_mrr) + "," + format_score(r.d_ndcg);
    if (with_pvalues) {
      out += "," + (r.t_mrr.n > 0 ? format_score(r.t_mrr.p_value) : std::string());
      out += "," + (r.t_ndcg.n > 0 ? format_score(r.t_ndcg.p_value) : std::string());
    }
    if (with_candidates) out += "," + format_score(r.mean_candidates);
    out += "\n";
  }
  return out;
}

std::string ExperimentTable::to_text() const {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-18s", key_column.c_str());
  out += buf;
  if (!rows.empty()) {
    for (const auto& c : rows.front().report.column_names()) {
      std::snprintf(buf, sizeof(buf), " %10s", c.c_str());
      out += buf;
    }
  }
  out += "      d_mrr     d_ndcg";
  if (with_pvalues) out += "      p_mrr     p_ndcg";
  out += "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::snprintf(buf, sizeof(buf), "%-18s", (r.key + (i == baseline ? " *" : "")).c_str());
    out += buf;
    for (double v : r.report.values()) {
      std::snprintf(buf, sizeof(buf), " %10.4f", v);
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), " %+10.4f %+10.4f", r.d_mrr, r.d_ndcg);
    out += buf;
    if (with_pvalues) {
      if (r.t_mrr.n > 0) {
        std::snprintf(buf, sizeof(buf), " %10.4f %10.4f", r.t_mrr.p_value, r.t_ndcg.p_value);
      } else {
        std::snprintf(buf, sizeof(buf), " %10s %10s", "-", "-");
      }
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::vector<RunList> aggregate_all(std::span<const RunBundle> bundles, const AggregationConfig& cfg,
                                   std::size_t jobs, std::span<const ExactScorer> rescorers) {
  if (!rescorers.empty() && rescorers.size() != bundles.size()) {
    throw ValidationError("rescorer count " + std::to_string(rescorers.size()) +
                          " does not match bundle count " + std::to_string(bundles.size()));
  }
  std::vector<RunList> out(bundles.size());
  parallel_for(bundles.size(), jobs, [&](std::size_t i) {
    const ExactScorer* rescorer = rescorers.empty() ? nullptr : &rescorers[i];
    out[i] = aggregate(bundles[i], cfg, rescorer);
  });
  return out;
}

ExperimentTable sweep_alpha(std::span<const RunBundle> bundles, const AggregationConfig& tmpl,
                            const Qrels& qrels, std::span<const double> grid,
                            const ExperimentOptions& opts) {
  if (grid.empty()) throw ValidationError("alpha grid is empty");
  ExperimentTable table;
  table.key_column = "alpha";
  AggregationConfig cfg = tmpl;
  cfg.pooling = Pooling::kAnchoredMax;
  bool has_baseline = false;
  for (double a : grid) {
    cfg.alpha = a;
    if (a == 1.0 && !has_baseline) {
      has_baseline = true;
      table.baseline = table.rows.size();
    }
    table.rows.push_back(make_row(format_score(a), bundles, cfg, qrels, opts));
  }
  if (!has_baseline) {
    cfg.alpha = 1.0;
    table.baseline = table.rows.size();
    table.rows.push_back(make_row(format_score(1.0), bundles, cfg, qrels, opts));
  }
  fill_deltas(table);
  return table;
}

ExperimentTable ablate_k(std::span<const RunBundle> bundles, std::span<const std::size_t> ks,
                         const AggregationConfig& cfg, const Qrels& qrels,
                         const ExperimentOptions& opts) {
  if (ks.empty()) throw ValidationError("no K values given");
  std::size_t max_k = 0;
  for (std::size_t k : ks) max_k = std::max(max_k, k);
  for (const auto& b : bundles) {
    if (b.hyp_runs.size() < max_k) {
      throw ValidationError("query '" + b.qid + "' has " + std::to_string(b.hyp_runs.size()) +
                            " hypothesis runs, K=" + std::to_string(max_k) + " requested");
    }
  }
  ExperimentTable table;
  table.key_column = "k";
  table.with_pvalues = true;
  table.with_candidates = true;
  bool has_zero = false;
  auto add = [&](std::size_t k) {
    std::vector<RunBundle> trimmed;
    trimmed.reserve(bundles.size());
    for (const auto& b : bundles) trimmed.push_back(b.prefix(k));
    ExperimentRow row = make_row(std::to_string(k), trimmed, cfg, qrels, opts);
    row.mean_candidates = mean_candidates(trimmed);
    table.rows.push_back(std::move(row));
  };
  for (std::size_t k : ks) {
    if (k == 0 && !has_zero) {
      has_zero = true;
      table.baseline = table.rows.size();
    }
    add(k);
  }
  if (!has_zero) {
    table.baseline = table.rows.size();
    add(0);
  }
  fill_deltas(table);
  return table;
}

ExperimentTable ablate_pooling(std::span<const RunBundle> bundles, const AggregationConfig& cfg,
                               const Qrels& qrels, const ExperimentOptions& opts) {
  ExperimentTable table;
  table.key_column = "pooling";
  table.with_pvalues = true;
  AggregationConfig c = cfg;
  c.pooling = Pooling::kAnchoredMax;
  c.alpha = 1.0;
  table.rows.push_back(make_row("base", bundles, c, qrels, opts));
  for (Pooling p : {Pooling::kUnanchoredMax, Pooling::kUnanchoredMean,
                    Pooling::kUnanchoredMedian}) {
    c.pooling = p;
    table.rows.push_back(make_row(std::string(to_string(p)), bundles, c, qrels, opts));
  }
  c.pooling = Pooling::kAnchoredMax;
  c.alpha = cfg.alpha;
  table.rows.push_back(make_row(c.label(), bundles, c, qrels, opts));
  fill_deltas(table);
  return table;
}

}  // namespace quark
