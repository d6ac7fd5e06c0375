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

#include "quark/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "quark/error.hpp"

namespace quark {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string where(const fs::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

json parse_json_line(const std::string& line, const fs::path& path, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(where(path, line_no) + ": malformed JSON (" + e.what() + ")");
  }
  if (!obj.is_object()) throw ParseError(where(path, line_no) + ": expected a JSON object");
  return obj;
}

std::string required_string(const json& obj, const char* key, const fs::path& path,
                            std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(where(path, line_no) + ": missing required field '" + key + "'");
  }
  if (it->is_string()) return it->get<std::string>();
  // BEIR ids are occasionally numeric.
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw ParseError(where(path, line_no) + ": field '" + key + "' must be a string");
}

std::vector<std::string> string_array(const json& obj, const char* key, const fs::path& path,
                                      std::size_t line_no) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) {
    throw ParseError(where(path, line_no) + ": field '" + key + "' must be an array");
  }
  for (const auto& v : *it) {
    if (v.is_string()) {
      out.push_back(v.get<std::string>());
    } else if (v.is_number_integer()) {
      out.push_back(std::to_string(v.get<long long>()));
    } else {
      throw ParseError(where(path, line_no) + ": field '" + key + "' must hold strings");
    }
  }
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return in;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    cols.push_back(line.substr(i, j - i));
    i = j;
  }
  return cols;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

Corpus load_corpus(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json obj = parse_json_line(line, path, line_no);
    Document d;
    d.doc_id = required_string(obj, "_id", path, line_no);
    d.text = required_string(obj, "text", path, line_no);
    if (auto it = obj.find("title"); it != obj.end() && it->is_string()) {
      std::string title = it->get<std::string>();
      if (!title.empty()) d.title = std::move(title);
    }
    docs.push_back(std::move(d));
  }
  if (docs.empty()) throw ValidationError("empty corpus: " + path.string());
  return Corpus(std::move(docs));
}

void write_corpus(const Corpus& corpus, const fs::path& path) {
  std::string out;
  for (const auto& d : corpus.docs()) {
    json obj = {{"_id", d.doc_id}, {"text", d.text}};
    if (d.title) obj["title"] = *d.title;
    out += obj.dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<QueryRecord> load_queries(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::vector<QueryRecord> queries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json obj = parse_json_line(line, path, line_no);
    QueryRecord q;
    q.qid = required_string(obj, "_id", path, line_no);
    q.text = required_string(obj, "text", path, line_no);
    q.hypotheses = dedup_hypotheses(string_array(obj, "hypotheses", path, line_no));
    std::vector<std::string> gold = string_array(obj, "gold", path, line_no);
    for (auto& g : gold) {
      if (std::find(q.gold.begin(), q.gold.end(), g) == q.gold.end()) q.gold.push_back(std::move(g));
    }
    queries.push_back(std::move(q));
  }
  validate_queries(queries);
  return queries;
}

void write_queries(std::span<const QueryRecord> queries, const fs::path& path) {
  std::string out;
  for (const auto& q : queries) {
    json obj = {{"_id", q.qid}, {"text", q.text}};
    if (!q.hypotheses.empty()) obj["hypotheses"] = q.hypotheses;
    if (!q.gold.empty()) obj["gold"] = q.gold;
    out += obj.dump();
    out += '\n';
  }
  write_file(path, out);
}

Qrels load_qrels(const fs::path& path) {
  std::ifstream in = open_input(path);
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    auto cols = split_ws(line);
    // BEIR ships a `query-id corpus-id score` header in its TSV variant.
    if (line_no == 1 && cols.size() == 3 && cols[0] == "query-id") continue;
    if (cols.size() != 4) {
      throw ParseError(where(path, line_no) + ": expected 4 columns, found " +
                       std::to_string(cols.size()));
    }
    int grade = 0;
    if (!parse_number(cols[3], grade)) {
      throw ParseError(where(path, line_no) + ": grade '" + std::string(cols[3]) +
                       "' is not an integer");
    }
    if (grade < 0) {
      throw ValidationError(where(path, line_no) + ": negative grade " + std::to_string(grade));
    }
    qrels.set(std::string(cols[0]), std::string(cols[2]), grade);
  }
  return qrels;
}

void write_qrels(const Qrels& qrels, const fs::path& path) {
  std::string out;
  for (const auto& [qid, judged] : qrels.all()) {
    for (const auto& [doc, grade] : judged) {
      out += qid + " 0 " + doc + " " + std::to_string(grade) + "\n";
    }
  }
  write_file(path, out);
}

std::string format_score(double score) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), score);
  if (ec != std::errc()) throw Error("cannot format score");
  return std::string(buf, ptr);
}

std::string format_run(std::span<const RunList> runs, std::string_view tag,
                       std::span<const std::string> header_comments) {
  std::string out;
  for (const auto& c : header_comments) {
    out += "# ";
    out += c;
    out += '\n';
  }
  const std::string tag_col = tag.empty() ? std::string("quark") : std::string(tag);
  for (const auto& run : runs) {
    std::size_t rank = 0;
    for (const auto& e : run.entries()) {
      out += run.qid();
      out += " Q0 ";
      out += e.doc_id;
      out += ' ';
      out += std::to_string(++rank);
      out += ' ';
      out += format_score(e.score);
      out += ' ';
      out += tag_col;
      out += '\n';
    }
  }
  return out;
}

void write_run(std::span<const RunList> runs, const fs::path& path, std::string_view tag,
               std::span<const std::string> header_comments) {
  write_file(path, format_run(runs, tag, header_comments));
}

std::vector<RunList> parse_run(std::string_view content, std::string_view source) {
  struct Pending {
    std::string qid;
    std::vector<ScoredDoc> entries;
  };
  std::vector<Pending> pending;
  std::unordered_map<std::string, std::size_t> index;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  const std::string src(source);
  while (pos <= content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (is_blank(line) || line.front() == '#') {
      if (end == content.size()) break;
      continue;
    }
    auto cols = split_ws(line);
    const std::string loc = src + ":" + std::to_string(line_no);
    if (cols.size() != 6) {
      throw ParseError(loc + ": expected 6 columns, found " + std::to_string(cols.size()));
    }
    std::size_t rank = 0;
    double score = 0.0;
    if (!parse_number(cols[3], rank)) throw ParseError(loc + ": bad rank '" + std::string(cols[3]) + "'");
    if (!parse_number(cols[4], score) || !std::isfinite(score)) {
      throw ParseError(loc + ": bad score '" + std::string(cols[4]) + "'");
    }
    std::string qid(cols[0]);
    auto [it, fresh] = index.emplace(qid, pending.size());
    if (fresh) pending.push_back({qid, {}});
    Pending& p = pending[it->second];
    if (rank != p.entries.size() + 1) {
      throw ValidationError(loc + ": rank " + std::to_string(rank) + " but line is entry " +
                            std::to_string(p.entries.size() + 1) + " of query '" + qid + "'");
    }
    ScoredDoc e{std::string(cols[2]), score};
    if (!p.entries.empty() && !ranks_before(p.entries.back(), e)) {
      throw ValidationError(loc + ": entries for query '" + qid + "' are not in ranking order");
    }
    p.entries.push_back(std::move(e));
    if (end == content.size()) break;
  }
  std::vector<RunList> runs;
  runs.reserve(pending.size());
  for (auto& p : pending) runs.emplace_back(std::move(p.qid), std::move(p.entries));
  return runs;
}

std::vector<RunList> read_run(const fs::path& path) {
  return parse_run(read_file(path), path.string());
}

}  // namespace quark
