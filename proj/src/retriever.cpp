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

#include "quark/retriever.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "quark/error.hpp"
#include "quark/parallel.hpp"

namespace quark {

namespace {
constexpr std::string_view kHypSep = "::h";
}

std::string input_key(std::string_view qid, std::size_t input) {
  std::string key(qid);
  if (input > 0) key += std::string(kHypSep) + std::to_string(input);
  return key;
}

std::pair<std::string, std::size_t> split_input_key(std::string_view key) {
  const auto pos = key.rfind(kHypSep);
  if (pos != std::string_view::npos) {
    const std::string_view digits = key.substr(pos + kHypSep.size());
    std::size_t k = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (!digits.empty() && ec == std::errc() && ptr == digits.data() + digits.size() && k > 0) {
      return {std::string(key.substr(0, pos)), k};
    }
  }
  return {std::string(key), 0};
}

std::size_t default_depth(std::size_t cutoff) { return std::max<std::size_t>(100, cutoff); }

RunList LexicalRetriever::search(const std::string& qid, std::size_t, std::string_view text,
                                 std::size_t depth) const {
  RunList run = index_.score(qid, text);
  run.truncate(depth);
  return run;
}

std::vector<double> LexicalRetriever::score(const std::string& qid, std::size_t,
                                            std::string_view text,
                                            std::span<const std::string> doc_ids) const {
  const RunList run = index_.score(qid, text, doc_ids);
  std::vector<double> out;
  out.reserve(doc_ids.size());
  for (const auto& id : doc_ids) out.push_back(run.score_of(id).value_or(0.0));
  return out;
}

std::span<const double> DenseRetriever::vector_of(const std::string& qid,
                                                  std::size_t input) const {
  const std::string key = input_key(qid, input);
  const auto row = queries_.find(key);
  if (!row) throw ValidationError("no query embedding for '" + key + "'");
  return queries_.row(*row);
}

RunList DenseRetriever::search(const std::string& qid, std::size_t input, std::string_view,
                               std::size_t depth) const {
  return index_.score(qid, vector_of(qid, input), depth);
}

std::vector<double> DenseRetriever::score(const std::string& qid, std::size_t input,
                                          std::string_view,
                                          std::span<const std::string> doc_ids) const {
  const RunList run = index_.score(qid, vector_of(qid, input), doc_ids);
  std::vector<double> out;
  out.reserve(doc_ids.size());
  for (const auto& id : doc_ids) out.push_back(*run.score_of(id));
  return out;
}

void collect_inputs(std::span<const QueryRecord> queries, std::vector<std::string>& keys,
                    std::vector<std::string>& texts) {
  for (const auto& q : queries) {
    keys.push_back(input_key(q.qid, 0));
    texts.push_back(q.text);
    for (std::size_t k = 0; k < q.hypotheses.size(); ++k) {
      keys.push_back(input_key(q.qid, k + 1));
      texts.push_back(q.hypotheses[k]);
    }
  }
}

std::vector<RunBundle> retrieve_bundles(const Retriever& retriever,
                                        std::span<const QueryRecord> queries, std::size_t depth,
                                        std::size_t jobs) {
  if (depth == 0) throw ValidationError("retrieval depth must be >= 1");
  std::vector<RunBundle> out(queries.size());
  parallel_for(queries.size(), jobs, [&](std::size_t i) {
    const QueryRecord& q = queries[i];
    RunBundle b;
    b.qid = q.qid;
    b.base_run = retriever.search(q.qid, 0, q.text, depth);
    for (std::size_t k = 0; k < q.hypotheses.size(); ++k) {
      b.hyp_runs.push_back(retriever.search(q.qid, k + 1, q.hypotheses[k], depth));
    }
    out[i] = std::move(b);
  });
  return out;
}

std::vector<RunBundle> assemble_bundles(std::span<const RunList> base_runs,
                                        std::span<const std::vector<RunList>> hyp_sets,
                                        const std::vector<QueryRecord>* queries) {
  auto copy_as = [](const RunList& r, const std::string& qid) {
    const auto entries = r.entries();
    return RunList(qid, std::vector<ScoredDoc>(entries.begin(), entries.end()));
  };
  std::map<std::string, const RunList*> base;
  std::vector<std::string> order;
  for (const auto& r : base_runs) {
    if (!base.emplace(r.qid(), &r).second) {
      throw ValidationError("duplicate base run for query '" + r.qid() + "'");
    }
    order.push_back(r.qid());
  }
  std::map<std::string, std::map<std::size_t, const RunList*>> hyps;
  for (std::size_t set = 0; set < hyp_sets.size(); ++set) {
    for (const auto& r : hyp_sets[set]) {
      auto [qid, k] = split_input_key(r.qid());
      if (k == 0) k = set + 1;
      if (!hyps[qid].emplace(k, &r).second) {
        throw ValidationError("two runs for hypothesis " + std::to_string(k) + " of query '" +
                              qid + "'");
      }
    }
  }
  if (queries != nullptr) {
    order.clear();
    for (const auto& q : *queries) order.push_back(q.qid);
  } else {
    std::vector<std::string> extra;
    for (const auto& [qid, runs] : hyps) {
      if (base.count(qid) == 0) extra.push_back(qid);
    }
    order.insert(order.end(), extra.begin(), extra.end());
  }
  std::vector<RunBundle> out;
  out.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::string& qid = order[i];
    RunBundle b;
    b.qid = qid;
    auto bit = base.find(qid);
    b.base_run = bit == base.end() ? RunList(qid) : copy_as(*bit->second, qid);
    auto hit = hyps.find(qid);
    std::size_t count = 0;
    if (queries != nullptr) {
      count = (*queries)[i].hypotheses.size();
    } else if (hit != hyps.end() && !hit->second.empty()) {
      count = hit->second.rbegin()->first;
    }
    for (std::size_t k = 1; k <= count; ++k) {
      const RunList* r = nullptr;
      if (hit != hyps.end()) {
        auto it = hit->second.find(k);
        if (it != hit->second.end()) r = it->second;
      }
      b.hyp_runs.push_back(r == nullptr ? RunList(qid) : copy_as(*r, qid));
    }
    out.push_back(std::move(b));
  }
  return out;
}

ExactScorer make_rescorer(const Retriever& retriever, const QueryRecord& query) {
  return [&retriever, &query](std::size_t input, std::span<const std::string> doc_ids) {
    if (input > query.hypotheses.size()) {
      throw ValidationError("query '" + query.qid + "' has no hypothesis " +
                            std::to_string(input));
    }
    const std::string& text = input == 0 ? query.text : query.hypotheses[input - 1];
    return retriever.score(query.qid, input, text, doc_ids);
  };
}

std::vector<ExactScorer> make_rescorers(const Retriever& retriever,
                                        std::span<const QueryRecord> queries) {
  std::vector<ExactScorer> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(make_rescorer(retriever, q));
  return out;
}

}  // namespace quark
