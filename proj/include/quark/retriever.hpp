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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quark/aggregation.hpp"
#include "quark/dense.hpp"
#include "quark/lexical.hpp"
#include "quark/types.hpp"

namespace quark {

// Input 0 is the query itself, input k >= 1 its k-th hypothesis. Query
// embeddings and hypothesis run files key inputs as "qid" and "qid::h<k>".
std::string input_key(std::string_view qid, std::size_t input);
// Inverse of input_key; k = 0 for a plain qid.
std::pair<std::string, std::size_t> split_input_key(std::string_view key);

// Retrieval depth per input when none is configured: max(100, cutoff).
std::size_t default_depth(std::size_t cutoff);

class Retriever {
 public:
  virtual ~Retriever() = default;
  virtual std::string_view name() const = 0;
  virtual MissingScorePolicy default_missing_policy() const = 0;
  // Top `depth` documents for one input.
  virtual RunList search(const std::string& qid, std::size_t input, std::string_view text,
                         std::size_t depth) const = 0;
  // Exact scores of `doc_ids`, aligned with them.
  virtual std::vector<double> score(const std::string& qid, std::size_t input,
                                    std::string_view text,
                                    std::span<const std::string> doc_ids) const = 0;
};

class LexicalRetriever final : public Retriever {
 public:
  explicit LexicalRetriever(const LexicalIndex& index) : index_(index) {}
  std::string_view name() const override { return "bm25"; }
  MissingScorePolicy default_missing_policy() const override { return MissingScorePolicy::kZero; }
  RunList search(const std::string& qid, std::size_t input, std::string_view text,
                 std::size_t depth) const override;
  std::vector<double> score(const std::string& qid, std::size_t input, std::string_view text,
                            std::span<const std::string> doc_ids) const override;

 private:
  const LexicalIndex& index_;
};

// Queries are looked up by input_key in a matrix of unit-norm vectors; the
// text argument is ignored.
class DenseRetriever final : public Retriever {
 public:
  DenseRetriever(const VectorIndex& index, const EmbeddingMatrix& queries)
      : index_(index), queries_(queries) {}
  std::string_view name() const override { return "dense"; }
  MissingScorePolicy default_missing_policy() const override {
    return MissingScorePolicy::kExactRescore;
  }
  RunList search(const std::string& qid, std::size_t input, std::string_view text,
                 std::size_t depth) const override;
  std::vector<double> score(const std::string& qid, std::size_t input, std::string_view text,
                            std::span<const std::string> doc_ids) const override;

 private:
  std::span<const double> vector_of(const std::string& qid, std::size_t input) const;
  const VectorIndex& index_;
  const EmbeddingMatrix& queries_;
};

// Every query and hypothesis text, keyed by input_key, in query order.
void collect_inputs(std::span<const QueryRecord> queries, std::vector<std::string>& keys,
                    std::vector<std::string>& texts);

// Base run plus one run per stored hypothesis, for every query.
std::vector<RunBundle> retrieve_bundles(const Retriever& retriever,
                                        std::span<const QueryRecord> queries, std::size_t depth,
                                        std::size_t jobs = 1);

// Rebuilds bundles from run files. Hypothesis runs keyed "qid::h<k>" land in
// slot k; plain-qid runs from the i-th set land in slot i + 1. With `queries`
// the bundle order and hypothesis counts follow the records; otherwise order
// follows the base runs (then any remaining qids, sorted) and the count is
// the highest slot seen. Missing slots become empty runs.
std::vector<RunBundle> assemble_bundles(std::span<const RunList> base_runs,
                                        std::span<const std::vector<RunList>> hyp_sets,
                                        const std::vector<QueryRecord>* queries = nullptr);

// Exact scorer over the inputs of one query. The retriever and query must
// outlive the returned function.
ExactScorer make_rescorer(const Retriever& retriever, const QueryRecord& query);
std::vector<ExactScorer> make_rescorers(const Retriever& retriever,
                                        std::span<const QueryRecord> queries);

}  // namespace quark
