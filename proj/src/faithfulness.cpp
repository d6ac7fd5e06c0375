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

#include "quark/faithfulness.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

#include <spdlog/spdlog.h>

#include "quark/error.hpp"
#include "quark/utf8.hpp"

namespace quark {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t lcs_subsequence(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t lcs_substring(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : 0;
      best = std::max(best, cur[j]);
    }
    std::swap(prev, cur);
  }
  return best;
}

double edit_similarity(std::u32string_view a, std::u32string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

FaithfulnessStats faithfulness(std::string_view query, std::string_view target) {
  const std::u32string q = utf8::decode(query);
  const std::u32string t = utf8::decode(target);
  if (q.empty() || t.empty()) throw ValidationError("faithfulness of an empty string");
  FaithfulnessStats s;
  s.len_q = q.size();
  s.len_target = t.size();
  const auto lcs = static_cast<double>(lcs_subsequence(q, t));
  if (lcs > 0.0) {
    const double precision = lcs / static_cast<double>(q.size());
    const double recall = lcs / static_cast<double>(t.size());
    s.rouge_l_char_f1 = 2.0 * precision * recall / (precision + recall);
  }
  s.edit_sim = edit_similarity(q, t);
  s.lcs_len = lcs_substring(q, t);
  return s;
}

FaithfulnessReport faithfulness_report(std::span<const QueryRecord> queries, const Corpus& corpus) {
  std::vector<double> rouge, edit, lcs, lq, lt;
  FaithfulnessReport report;
  for (const auto& q : queries) {
    if (q.gold.size() != 1) {
      spdlog::warn("faithfulness: skipping query '{}' with {} gold documents", q.qid,
                   q.gold.size());
      ++report.skipped;
      continue;
    }
    auto pos = corpus.position(q.gold.front());
    if (!pos) {
      spdlog::warn("faithfulness: skipping query '{}', gold '{}' not in corpus", q.qid,
                   q.gold.front());
      ++report.skipped;
      continue;
    }
    const std::string target = corpus[*pos].text;
    if (q.text.empty() || target.empty()) {
      ++report.skipped;
      continue;
    }
    const FaithfulnessStats s = faithfulness(q.text, target);
    rouge.push_back(s.rouge_l_char_f1);
    edit.push_back(s.edit_sim);
    lcs.push_back(static_cast<double>(s.lcs_len));
    lq.push_back(static_cast<double>(s.len_q));
    lt.push_back(static_cast<double>(s.len_target));
  }
  if (rouge.empty()) throw ValidationError("no evaluable queries");
  report.evaluated = rouge.size();
  report.rouge_l_char_f1 = summarize(rouge);
  report.edit_sim = summarize(edit);
  report.lcs_len = summarize(lcs);
  report.len_q = summarize(lq);
  report.len_target = summarize(lt);
  return report;
}

namespace {

struct Row {
  const char* name;
  const SummaryStats* stats;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

std::string FaithfulnessReport::to_csv() const {
  const Row rows[] = {{"rouge_l_char_f1", &rouge_l_char_f1}, {"edit_sim", &edit_sim},
                      {"lcs_len", &lcs_len}, {"len_q", &len_q}, {"len_target", &len_target}};
  std::string out = "metric,mean,median,std,min,max\n";
  for (const auto& r : rows) {
    out += std::string(r.name) + "," + fmt(r.stats->mean) + "," + fmt(r.stats->median) + "," +
           fmt(r.stats->stddev) + "," + fmt(r.stats->min) + "," + fmt(r.stats->max) + "\n";
  }
  return out;
}

std::string FaithfulnessReport::to_text() const {
  const Row rows[] = {{"R-L(char)", &rouge_l_char_f1}, {"EditSim", &edit_sim},
                      {"LCS", &lcs_len}, {"|q|", &len_q}, {"|d*|", &len_target}};
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "queries evaluated: %zu, skipped: %zu\n", evaluated, skipped);
  out += line;
  std::snprintf(line, sizeof(line), "%-10s %9s %9s %9s %9s %9s\n", "metric", "mean", "median",
                "std", "min", "max");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-10s %9.3f %9.3f %9.3f %9.3f %9.3f\n", r.name,
                  r.stats->mean, r.stats->median, r.stats->stddev, r.stats->min, r.stats->max);
    out += line;
  }
  return out;
}

}  // namespace quark
