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

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quark/types.hpp"

namespace quark {

// BEIR-style JSONL: one object per line with `_id`, `text` and optional `title`.
Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

// JSONL with `_id`, `text`, optional `hypotheses` and `gold` arrays.
std::vector<QueryRecord> load_queries(const std::filesystem::path& path);
void write_queries(std::span<const QueryRecord> queries, const std::filesystem::path& path);

// TREC qrels: `qid iter docid grade`, whitespace separated.
Qrels load_qrels(const std::filesystem::path& path);
void write_qrels(const Qrels& qrels, const std::filesystem::path& path);

// Shortest decimal that parses back to the same double.
std::string format_score(double score);

// TREC run format: `qid Q0 docid rank score tag`. Lines starting with '#'
// carry provenance (seed, stage) and are ignored by read_run.
void write_run(std::span<const RunList> runs, const std::filesystem::path& path,
               std::string_view tag, std::span<const std::string> header_comments = {});
std::string format_run(std::span<const RunList> runs, std::string_view tag,
                       std::span<const std::string> header_comments = {});

// Runs in order of first qid appearance. Throws ValidationError when the rank
// column disagrees with line order or the lines are not in ranking order.
std::vector<RunList> read_run(const std::filesystem::path& path);
std::vector<RunList> parse_run(std::string_view content, std::string_view source = "<memory>");

std::string read_file(const std::filesystem::path& path);
// Writes via a temporary sibling and rename.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace quark
