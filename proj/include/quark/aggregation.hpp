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
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quark/types.hpp"

namespace quark {

enum class Pooling {
  kAnchoredMax,       // alpha * S(q,d) + (1 - alpha) * max_k S(h_k,d)
  kUnanchoredMax,     // max over q and every h_k
  kUnanchoredMean,    // mean over q and every h_k
  kUnanchoredMedian,  // median over q and every h_k
};

enum class MissingScorePolicy {
  kZero,          // a document absent from a run scores 0 for that input
  kExactRescore,  // ask the retriever for the exact score
};

Pooling parse_pooling(std::string_view name);
std::string_view to_string(Pooling p);
MissingScorePolicy parse_missing_policy(std::string_view name);
std::string_view to_string(MissingScorePolicy p);

struct AggregationConfig {
  double alpha = 0.8;
  Pooling pooling = Pooling::kAnchoredMax;
  MissingScorePolicy missing = MissingScorePolicy::kZero;
  std::size_t output_depth = 100;
  // Min-max normalize each input run over its own entries before pooling.
  bool normalize_runs = false;

  // Throws ValidationError unless alpha is in [0, 1] and output_depth >= 1.
  void validate() const;
  // Short tag for run files, e.g. "anchored-max-a0.8".
  std::string label() const;
};

// Runs for one query: the original query's run and one run per hypothesis,
// in hypothesis order.
struct RunBundle {
  std::string qid;
  RunList base_run;
  std::vector<RunList> hyp_runs;

  // Throws ValidationError when a run carries a different qid.
  void validate() const;
  // First `k` hypothesis runs only.
  RunBundle prefix(std::size_t k) const;
};

// Exact score of each document for input `input` (0 = original query,
// k >= 1 = k-th hypothesis).
using ExactScorer =
    std::function<std::vector<double>(std::size_t input, std::span<const std::string> doc_ids)>;

// Fuses a bundle over the union of candidates from every run. With no
// hypothesis runs, or alpha = 1 under anchored pooling, the result is the
// base run truncated to output_depth. Dispatches to pool_unanchored for the
// unanchored poolings. `rescorer` is required for kExactRescore.
RunList aggregate(const RunBundle& bundle, const AggregationConfig& cfg,
                  const ExactScorer* rescorer = nullptr);

// Symmetric pooling over the 1 + K inputs; missing scores are filled per
// cfg.missing before pooling, so mean and median always see 1 + K values.
RunList pool_unanchored(const RunBundle& bundle, Pooling pooling, const AggregationConfig& cfg,
                        const ExactScorer* rescorer = nullptr);

// {0.1, ..., 0.9, 0.91, ..., 0.99}
std::vector<double> alpha_grid();

}  // namespace quark
