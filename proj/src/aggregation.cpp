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

#include "quark/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "quark/error.hpp"

namespace quark {

Pooling parse_pooling(std::string_view name) {
  if (name == "anchored-max" || name == "anchored" || name == "quark") return Pooling::kAnchoredMax;
  if (name == "unanchored-max" || name == "max") return Pooling::kUnanchoredMax;
  if (name == "unanchored-mean" || name == "mean") return Pooling::kUnanchoredMean;
  if (name == "unanchored-median" || name == "median") return Pooling::kUnanchoredMedian;
  throw ValidationError("unknown pooling '" + std::string(name) + "'");
}

std::string_view to_string(Pooling p) {
  switch (p) {
    case Pooling::kAnchoredMax: return "anchored-max";
    case Pooling::kUnanchoredMax: return "unanchored-max";
    case Pooling::kUnanchoredMean: return "unanchored-mean";
    case Pooling::kUnanchoredMedian: return "unanchored-median";
  }
  return "anchored-max";
}

MissingScorePolicy parse_missing_policy(std::string_view name) {
  if (name == "zero") return MissingScorePolicy::kZero;
  if (name == "rescore" || name == "exact-rescore") return MissingScorePolicy::kExactRescore;
  throw ValidationError("unknown missing-score policy '" + std::string(name) + "'");
}

std::string_view to_string(MissingScorePolicy p) {
  return p == MissingScorePolicy::kZero ? "zero" : "exact-rescore";
}

void AggregationConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
  if (output_depth == 0) throw ValidationError("output depth must be >= 1");
}

std::string AggregationConfig::label() const {
  std::string out(to_string(pooling));
  if (pooling == Pooling::kAnchoredMax) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "-a%g", alpha);
    out += buf;
  }
  if (missing == MissingScorePolicy::kExactRescore) out += "-rescore";
  if (normalize_runs) out += "-norm";
  return out;
}

void RunBundle::validate() const {
  if (base_run.qid() != qid && !(base_run.empty() && base_run.qid().empty())) {
    throw ValidationError("bundle '" + qid + "' holds a base run for query '" + base_run.qid() +
                          "'");
  }
  for (const auto& r : hyp_runs) {
    if (r.qid() != qid && !(r.empty() && r.qid().empty())) {
      throw ValidationError("bundle '" + qid + "' holds a hypothesis run for query '" + r.qid() +
                            "'");
    }
  }
}

RunBundle RunBundle::prefix(std::size_t k) const {
  RunBundle out{qid, base_run, {}};
  const std::size_t n = std::min(k, hyp_runs.size());
  out.hyp_runs.assign(hyp_runs.begin(), hyp_runs.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

namespace {

// scores[i][c]: score of candidate c under input i after the missing-score
// policy has been applied.
struct ScoreTable {
  std::vector<std::string> candidates;
  std::vector<std::vector<double>> scores;
};

ScoreTable build_table(const RunBundle& bundle, const AggregationConfig& cfg,
                       const ExactScorer* rescorer) {
  std::vector<const RunList*> inputs;
  inputs.push_back(&bundle.base_run);
  for (const auto& r : bundle.hyp_runs) inputs.push_back(&r);

  ScoreTable t;
  std::unordered_map<std::string_view, std::size_t> index;
  for (const RunList* run : inputs) {
    for (const auto& e : run->entries()) {
      if (index.emplace(e.doc_id, t.candidates.size()).second) t.candidates.push_back(e.doc_id);
    }
  }
  const std::size_t n = t.candidates.size();
  t.scores.assign(inputs.size(), std::vector<double>(n, 0.0));
  std::vector<char> present(n);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::fill(present.begin(), present.end(), 0);
    const auto entries = inputs[i]->entries();
    double lo = 0.0;
    double hi = 0.0;
    if (cfg.normalize_runs && !entries.empty()) {
      hi = entries.front().score;
      lo = entries.back().score;
    }
    auto norm = [&](double s) {
      if (!cfg.normalize_runs || entries.empty()) return s;
      return hi > lo ? (s - lo) / (hi - lo) : 1.0;
    };
    for (const auto& e : entries) {
      const std::size_t c = index.at(e.doc_id);
      t.scores[i][c] = norm(e.score);
      present[c] = 1;
    }
    if (cfg.missing != MissingScorePolicy::kExactRescore) continue;
    std::vector<std::string> missing;
    std::vector<std::size_t> slots;
    for (std::size_t c = 0; c < n; ++c) {
      if (!present[c]) {
        missing.push_back(t.candidates[c]);
        slots.push_back(c);
      }
    }
    if (missing.empty()) continue;
    const std::vector<double> exact = (*rescorer)(i, missing);
    if (exact.size() != missing.size()) {
      throw ValidationError("rescorer returned " + std::to_string(exact.size()) + " scores for " +
                            std::to_string(missing.size()) + " documents");
    }
    for (std::size_t m = 0; m < slots.size(); ++m) t.scores[i][slots[m]] = norm(exact[m]);
  }
  return t;
}

void check_inputs(const RunBundle& bundle, const AggregationConfig& cfg,
                  const ExactScorer* rescorer) {
  cfg.validate();
  bundle.validate();
  if (cfg.missing == MissingScorePolicy::kExactRescore && (rescorer == nullptr || !*rescorer)) {
    throw ValidationError("exact-rescore policy needs a rescorer");
  }
}

RunList finish(const RunBundle& bundle, const ScoreTable& t, std::vector<double> fused,
               std::size_t depth) {
  std::vector<ScoredDoc> entries;
  entries.reserve(t.candidates.size());
  for (std::size_t c = 0; c < t.candidates.size(); ++c) {
    entries.push_back({t.candidates[c], fused[c]});
  }
  RunList out(bundle.qid, std::move(entries));
  out.truncate(depth);
  return out;
}

RunList base_only(const RunBundle& bundle, std::size_t depth) {
  RunList out(bundle.qid, std::vector<ScoredDoc>(bundle.base_run.entries().begin(),
                                                 bundle.base_run.entries().end()));
  out.truncate(depth);
  return out;
}

}  // namespace

RunList aggregate(const RunBundle& bundle, const AggregationConfig& cfg,
                  const ExactScorer* rescorer) {
  if (cfg.pooling != Pooling::kAnchoredMax) {
    return pool_unanchored(bundle, cfg.pooling, cfg, rescorer);
  }
  check_inputs(bundle, cfg, rescorer);
  if (bundle.hyp_runs.empty() || cfg.alpha == 1.0) return base_only(bundle, cfg.output_depth);

  const ScoreTable t = build_table(bundle, cfg, rescorer);
  const std::size_t n = t.candidates.size();
  std::vector<double> fused(n);
  for (std::size_t c = 0; c < n; ++c) {
    double best = t.scores[1][c];
    for (std::size_t i = 2; i < t.scores.size(); ++i) best = std::max(best, t.scores[i][c]);
    fused[c] = cfg.alpha * t.scores[0][c] + (1.0 - cfg.alpha) * best;
  }
  return finish(bundle, t, std::move(fused), cfg.output_depth);
}

RunList pool_unanchored(const RunBundle& bundle, Pooling pooling, const AggregationConfig& cfg,
                        const ExactScorer* rescorer) {
  if (pooling == Pooling::kAnchoredMax) {
    throw ValidationError("pool_unanchored called with anchored pooling");
  }
  check_inputs(bundle, cfg, rescorer);
  if (bundle.hyp_runs.empty()) return base_only(bundle, cfg.output_depth);

  const ScoreTable t = build_table(bundle, cfg, rescorer);
  const std::size_t n = t.candidates.size();
  const std::size_t m = t.scores.size();
  std::vector<double> fused(n);
  std::vector<double> column(m);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < m; ++i) column[i] = t.scores[i][c];
    // Sorting first makes mean and median independent of input order.
    std::sort(column.begin(), column.end());
    switch (pooling) {
      case Pooling::kUnanchoredMax:
        fused[c] = column.back();
        break;
      case Pooling::kUnanchoredMean: {
        double sum = 0.0;
        for (double v : column) sum += v;
        fused[c] = sum / static_cast<double>(m);
        break;
      }
      case Pooling::kUnanchoredMedian:
        fused[c] = m % 2 == 1 ? column[m / 2] : (column[m / 2 - 1] + column[m / 2]) / 2.0;
        break;
      case Pooling::kAnchoredMax:
        break;
    }
  }
  return finish(bundle, t, std::move(fused), cfg.output_depth);
}

std::vector<double> alpha_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
  for (int i = 91; i <= 99; ++i) grid.push_back(i / 100.0);
  return grid;
}

}  // namespace quark
