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
#include <string_view>

#include "quark/stats.hpp"
#include "quark/types.hpp"

namespace quark {

// Character-level string similarity; all functions work on code points.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
std::size_t lcs_subsequence(std::u32string_view a, std::u32string_view b);
std::size_t lcs_substring(std::u32string_view a, std::u32string_view b);

// 1 - ED(a, b) / max(|a|, |b|).
double edit_similarity(std::u32string_view a, std::u32string_view b);

struct FaithfulnessStats {
  double rouge_l_char_f1 = 0.0;
  double edit_sim = 0.0;
  std::size_t lcs_len = 0;  // longest common substring
  std::size_t len_q = 0;
  std::size_t len_target = 0;
};

// How closely an observed query reproduces its target. Throws
// ValidationError when either string is empty.
FaithfulnessStats faithfulness(std::string_view query, std::string_view target);

struct FaithfulnessReport {
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  SummaryStats rouge_l_char_f1;
  SummaryStats edit_sim;
  SummaryStats lcs_len;
  SummaryStats len_q;
  SummaryStats len_target;

  // metric,mean,median,std,min,max rows.
  std::string to_csv() const;
  std::string to_text() const;
};

// Aggregates faithfulness over queries with exactly one gold document;
// others are skipped with a warning. Throws ValidationError
// ("no evaluable queries") when nothing is left.
FaithfulnessReport faithfulness_report(std::span<const QueryRecord> queries, const Corpus& corpus);

}  // namespace quark
