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
#include <span>
#include <string>
#include <vector>

#include "quark/aggregation.hpp"
#include "quark/metrics.hpp"
#include "quark/stats.hpp"
#include "quark/types.hpp"

namespace quark {

struct ExperimentRow {
  std::string key;  // alpha value, K, or pooling name
  EvalReport report;
  double d_mrr = 0.0;
  double d_ndcg = 0.0;
  // Against the table's baseline row; n = 0 when the test could not run.
  PairedTestResult t_mrr;
  PairedTestResult t_ndcg;
  double mean_candidates = 0.0;
};

struct ExperimentTable {
  std::string key_column;
  std::vector<ExperimentRow> rows;
  std::size_t baseline = 0;  // index of the row the deltas refer to
  bool with_pvalues = false;
  bool with_candidates = false;

  const ExperimentRow& baseline_row() const { return rows.at(baseline); }
  // Row with the highest MRR; first wins ties.
  const ExperimentRow& best_row() const;
  std::string to_csv() const;
  std::string to_text() const;
};

struct ExperimentOptions {
  EvalOptions eval;
  // Empty, or one exact scorer per bundle (required for exact-rescore).
  std::span<const ExactScorer> rescorers;
};

// Aggregates every bundle; parallel over bundles with eval.jobs workers.
std::vector<RunList> aggregate_all(std::span<const RunBundle> bundles, const AggregationConfig& cfg,
                                   std::size_t jobs = 1,
                                   std::span<const ExactScorer> rescorers = {});

// One row per grid value plus an alpha = 1 baseline row when the grid lacks
// one. Columns: alpha, recall@..., mrr@M, ndcg@M, d_mrr, d_ndcg.
ExperimentTable sweep_alpha(std::span<const RunBundle> bundles, const AggregationConfig& tmpl,
                            const Qrels& qrels, std::span<const double> grid,
                            const ExperimentOptions& opts = {});

// Row per K using the first K hypothesis runs; deltas against K = 0.
ExperimentTable ablate_k(std::span<const RunBundle> bundles, std::span<const std::size_t> ks,
                         const AggregationConfig& cfg, const Qrels& qrels,
                         const ExperimentOptions& opts = {});

// Rows: base, unanchored max/mean/median, anchored max at cfg.alpha.
ExperimentTable ablate_pooling(std::span<const RunBundle> bundles, const AggregationConfig& cfg,
                               const Qrels& qrels, const ExperimentOptions& opts = {});

}  // namespace quark
