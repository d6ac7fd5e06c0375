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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quark/stats.hpp"
#include "quark/types.hpp"

namespace quark {

enum class Metric { kRecall, kMrr, kNdcg };

Metric parse_metric(std::string_view name);
std::string_view to_string(Metric m);

// Each returns nullopt when the query has no document with grade > 0.
// Throws ValidationError for M == 0.
std::optional<double> recall_at(const RunList& run, const Qrels& qrels, std::size_t m);
std::optional<double> mrr_at(const RunList& run, const Qrels& qrels, std::size_t m);
std::optional<double> ndcg_at(const RunList& run, const Qrels& qrels, std::size_t m);
std::optional<double> metric_at(Metric metric, const RunList& run, const Qrels& qrels,
                                std::size_t m);

struct MetricResult {
  Metric metric = Metric::kMrr;
  std::size_t cutoff = 10;
  std::map<std::string, double> per_query;
  double mean = 0.0;
  std::size_t excluded = 0;
};

// Evaluates every query in `universe` (default: the qids of `runs`). A query
// with no run counts as an empty run; one without positive judgments is
// excluded and counted.
MetricResult evaluate_metric(std::span<const RunList> runs, const Qrels& qrels, Metric metric,
                             std::size_t m, const std::vector<std::string>* universe = nullptr);

struct EvalOptions {
  std::vector<std::size_t> recall_cutoffs{1, 5, 10};
  std::size_t rank_cutoff = 10;  // MRR and nDCG
  std::size_t jobs = 1;
};

struct EvalReport {
  std::vector<std::size_t> recall_cutoffs;
  std::vector<double> recall;  // aligned with recall_cutoffs
  std::size_t rank_cutoff = 10;
  double mrr = 0.0;
  double ndcg = 0.0;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
  std::map<std::string, double> mrr_per_query;
  std::map<std::string, double> ndcg_per_query;

  std::vector<std::string> column_names() const;
  std::vector<double> values() const;
  // Header row plus one value row.
  std::string to_csv() const;
  std::string to_text() const;
  bool operator==(const EvalReport&) const = default;
};

// Throws ValidationError when no run qid appears in the qrels.
EvalReport evaluate_run(std::span<const RunList> runs, const Qrels& qrels,
                        const EvalOptions& opts = {},
                        const std::vector<std::string>* universe = nullptr);

// Pairs per-query values on the qids both maps share.
PairedTestResult paired_ttest(const std::map<std::string, double>& a,
                              const std::map<std::string, double>& b);

}  // namespace quark
