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

// quark: command-line front end for indexing, hypothesis generation,
// retrieval, aggregation, evaluation and the end-to-end pipeline.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "quark/aggregation.hpp"
#include "quark/dense.hpp"
#include "quark/error.hpp"
#include "quark/experiments.hpp"
#include "quark/faithfulness.hpp"
#include "quark/hypothesis.hpp"
#include "quark/io.hpp"
#include "quark/lexical.hpp"
#include "quark/metrics.hpp"
#include "quark/pipeline.hpp"
#include "quark/retriever.hpp"
#include "quark/simulation.hpp"

namespace fs = std::filesystem;
using namespace quark;

namespace {

std::size_t g_jobs = 1;

void emit(const std::string& content, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_file(path, content);
  }
}

std::vector<std::size_t> parse_sizes(const std::string& csv) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    auto end = csv.find(',', start);
    if (end == std::string::npos) end = csv.size();
    const std::string item = csv.substr(start, end - start);
    if (!item.empty()) out.push_back(std::stoul(item));
    start = end + 1;
  }
  return out;
}

// ---- indexes and retrievers ------------------------------------------------

enum class IndexKind { kLexical, kDense };

IndexKind sniff_index(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in) throw ParseError(path.string() + ": not an index file");
  if (std::string_view(magic, 6) == "QRKLEX") return IndexKind::kLexical;
  if (std::string_view(magic, 6) == "QRKVEC") return IndexKind::kDense;
  throw ParseError(path.string() + ": unknown index format");
}

struct ServiceOptions {
  std::string url;
  std::string model;
  std::string token_env;
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;

  void add(CLI::App* app, const std::string& prefix) {
    app->add_option("--" + prefix + "service", url, "OpenAI-compatible embeddings URL");
    app->add_option("--" + prefix + "model", model, "Embedding model name");
    app->add_option("--token-env", token_env, "Environment variable holding the bearer token");
    app->add_option("--batch-size", batch_size, "Texts per request")->capture_default_str();
    app->add_option("--max-in-flight", max_in_flight, "Concurrent requests")
        ->capture_default_str();
  }
  EmbeddingSource source() const {
    EmbeddingSource s;
    s.kind = EmbeddingSource::Kind::kService;
    s.service.url = url;
    s.service.model = model;
    s.service.token_env = token_env;
    s.service.batch_size = batch_size;
    s.service.max_in_flight = max_in_flight;
    return s;
  }
};

// Holds whichever index a file contains plus the retriever over it.
struct LoadedRetriever {
  std::optional<LexicalIndex> lexical;
  std::optional<VectorIndex> dense;
  EmbeddingMatrix query_vectors;
  std::unique_ptr<Retriever> retriever;
};

std::unique_ptr<LoadedRetriever> open_retriever(const fs::path& index_path,
                                                const std::vector<QueryRecord>& queries,
                                                const std::string& query_embeddings,
                                                const ServiceOptions& svc) {
  auto out = std::make_unique<LoadedRetriever>();
  if (sniff_index(index_path) == IndexKind::kLexical) {
    out->lexical.emplace(LexicalIndex::load(index_path));
    out->retriever = std::make_unique<LexicalRetriever>(*out->lexical);
    return out;
  }
  out->dense.emplace(VectorIndex::load(index_path));
  std::vector<std::string> keys;
  std::vector<std::string> texts;
  collect_inputs(queries, keys, texts);
  if (!query_embeddings.empty()) {
    const EmbeddingMatrix all = load_embedding_file(query_embeddings);
    out->query_vectors = EmbeddingMatrix(all.dim());
    for (const auto& key : keys) {
      const auto row = all.find(key);
      if (!row) throw DataError("query embeddings lack a vector for '" + key + "'");
      out->query_vectors.append(key, all.row(*row));
    }
  } else if (!svc.url.empty()) {
    out->query_vectors = ingest_embeddings(svc.source(), keys, texts);
  } else {
    throw ValidationError("a dense index needs --query-embeddings or --service");
  }
  out->retriever = std::make_unique<DenseRetriever>(*out->dense, out->query_vectors);
  return out;
}

// ---- bundles from run files ----------------------------------------------

struct BundleOptions {
  std::string base;
  std::vector<std::string> hyps;
  std::string queries;
  std::string index;
  std::string query_embeddings;
  ServiceOptions svc;
  double alpha = 0.8;
  std::string pooling = "anchored-max";
  std::string missing = "zero";
  std::size_t depth = 100;
  bool normalize = false;

  void add(CLI::App* app, bool with_alpha) {
    app->add_option("--base", base, "Run file of the original queries")->required();
    app->add_option("--hyps", hyps, "Hypothesis run file(s)");
    app->add_option("--queries", queries,
                    "Queries JSONL with hypotheses (fixes order and hypothesis counts)");
    app->add_option("--index", index, "Index for exact rescoring");
    app->add_option("--query-embeddings", query_embeddings, "Query vectors for a dense index");
    svc.add(app, "");
    if (with_alpha) app->add_option("--alpha", alpha, "Anchoring weight")->capture_default_str();
    app->add_option("--missing", missing, "Missing-score policy: zero or rescore")
        ->capture_default_str();
    app->add_option("--depth", depth, "Output depth")->capture_default_str();
    app->add_flag("--normalize", normalize, "Min-max normalize each run before pooling");
  }

  AggregationConfig config() const {
    AggregationConfig c;
    c.alpha = alpha;
    c.pooling = parse_pooling(pooling);
    c.missing = parse_missing_policy(missing);
    c.output_depth = depth;
    c.normalize_runs = normalize;
    c.validate();
    return c;
  }
};

struct LoadedBundles {
  std::vector<QueryRecord> queries;
  std::vector<RunBundle> bundles;
  std::unique_ptr<LoadedRetriever> retriever;
  std::vector<ExactScorer> rescorers;
};

LoadedBundles load_bundles(const BundleOptions& o, const AggregationConfig& cfg) {
  LoadedBundles out;
  if (!o.queries.empty()) out.queries = load_queries(o.queries);
  const auto base = read_run(o.base);
  std::vector<std::vector<RunList>> sets;
  for (const auto& h : o.hyps) sets.push_back(read_run(h));
  out.bundles = assemble_bundles(base, sets, o.queries.empty() ? nullptr : &out.queries);
  if (cfg.missing == MissingScorePolicy::kExactRescore) {
    if (o.index.empty() || o.queries.empty()) {
      throw ValidationError("--missing rescore needs --index and --queries");
    }
    out.retriever = open_retriever(o.index, out.queries, o.query_embeddings, o.svc);
    out.rescorers = make_rescorers(*out.retriever->retriever, out.queries);
  }
  return out;
}

// ---- subcommands ----------------------------------------------------------

void add_synth_corpus(CLI::App& app) {
  auto cfg = std::make_shared<SyntheticCorpusConfig>();
  auto out = std::make_shared<std::string>();
  auto* sub = app.add_subcommand("synth-corpus", "Generate a synthetic CJK line corpus");
  sub->add_option("--docs", cfg->docs, "Number of documents")->capture_default_str();
  sub->add_option("--family-size", cfg->family_size, "Lines per family")->capture_default_str();
  sub->add_option("--variant-rate", cfg->variant_rate, "Per-word replacement rate")
      ->capture_default_str();
  sub->add_option("--seed", cfg->seed, "Seed")->capture_default_str();
  sub->add_option("--out", *out, "Output corpus JSONL")->required();
  sub->callback([cfg, out] { write_corpus(synth_corpus(*cfg), *out); });
}

void add_index_lexical(CLI::App& app) {
  struct Opts {
    std::string corpus, out, tokenizer = "mixed";
    double k1 = 1.2, b = 0.75;
    bool no_lowercase = false;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("index-lexical", "Build a BM25 index");
  sub->add_option("--corpus", o->corpus, "Corpus JSONL")->required();
  sub->add_option("--out", o->out, "Index file")->required();
  sub->add_option("--k1", o->k1)->capture_default_str();
  sub->add_option("--b", o->b)->capture_default_str();
  sub->add_option("--tokenizer", o->tokenizer, "unicode-words, cjk-char-bigrams or mixed")
      ->capture_default_str();
  sub->add_flag("--no-lowercase", o->no_lowercase);
  sub->callback([o] {
    Tokenizer tok{parse_tokenizer_mode(o->tokenizer), !o->no_lowercase};
    const auto index = LexicalIndex::build(load_corpus(o->corpus), tok, {o->k1, o->b});
    index.save(o->out);
    spdlog::info("indexed {} documents, {} terms", index.doc_count(), index.vocabulary_size());
  });
}

void add_index_dense(CLI::App& app) {
  struct Opts {
    std::string corpus, out, embeddings;
    ServiceOptions svc;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("index-dense", "Build a flat inner-product index");
  sub->add_option("--corpus", o->corpus, "Corpus JSONL (ids and texts)")->required();
  sub->add_option("--out", o->out, "Index file")->required();
  auto* emb = sub->add_option("--embeddings", o->embeddings, "Embedding TSV file");
  o->svc.add(sub, "");
  sub->get_option("--service")->excludes(emb);
  sub->callback([o] {
    const Corpus corpus = load_corpus(o->corpus);
    std::vector<std::string> ids;
    std::vector<std::string> texts;
    for (const auto& d : corpus.docs()) {
      ids.push_back(d.doc_id);
      texts.push_back(d.full_text());
    }
    EmbeddingSource src;
    if (!o->embeddings.empty()) {
      src.path = o->embeddings;
    } else if (!o->svc.url.empty()) {
      src = o->svc.source();
    } else {
      throw ValidationError("index-dense needs --embeddings or --service");
    }
    VectorIndex(ingest_embeddings(src, ids, texts)).save(o->out);
  });
}

void add_hypothesize(CLI::App& app) {
  struct Opts {
    std::string queries, out, provider = "file", level = "H", corpus;
    std::size_t k = 5;
    std::uint64_t seed = 0;
    LlmServiceConfig llm;
    std::string tmpl = "lyrics", tmpl_file;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("hypothesize", "Generate recovery hypotheses");
  sub->add_option("--queries", o->queries, "Queries JSONL")->required();
  sub->add_option("--out", o->out, "Output queries JSONL with hypotheses")->required();
  sub->add_option("--provider", o->provider, "file, llm, oracle or oracle-gold")
      ->capture_default_str();
  sub->add_option("--k", o->k, "Hypotheses per query")->capture_default_str();
  sub->add_option("--level", o->level, "Oracle noise level: L1, L2, L3 or H")
      ->capture_default_str();
  sub->add_option("--seed", o->seed)->capture_default_str();
  sub->add_option("--corpus", o->corpus, "Corpus (oracle-gold only)");
  sub->add_option("--llm-url", o->llm.url, "Chat-completions URL");
  sub->add_option("--llm-model", o->llm.model);
  sub->add_option("--token-env", o->llm.token_env, "Environment variable holding the token");
  sub->add_option("--template", o->tmpl, "Built-in prompt template")->capture_default_str();
  sub->add_option("--template-file", o->tmpl_file, "Prompt template file");
  sub->add_option("--temperature", o->llm.temperature)->capture_default_str();
  sub->add_option("--max-in-flight", o->llm.max_in_flight)->capture_default_str();
  sub->callback([o] {
    auto queries = load_queries(o->queries);
    std::unique_ptr<HypothesisProvider> provider;
    std::optional<Corpus> corpus;
    const std::uint64_t seed = derive_seed(o->seed, "hypothesize");
    switch (parse_provider_kind(o->provider)) {
      case ProviderKind::kPrecomputed:
        provider = std::make_unique<PrecomputedProvider>(o->k);
        break;
      case ProviderKind::kOracleCorruptor:
        provider = std::make_unique<OracleCorruptorProvider>(o->k, noise_level(o->level), seed);
        break;
      case ProviderKind::kGoldCorruptor:
        if (o->corpus.empty()) throw ValidationError("oracle-gold needs --corpus");
        corpus.emplace(load_corpus(o->corpus));
        provider = std::make_unique<GoldCorruptorProvider>(o->k, noise_level(o->level), seed,
                                                           *corpus);
        break;
      case ProviderKind::kLlmService: {
        LlmServiceConfig cfg = o->llm;
        cfg.prompt_template =
            o->tmpl_file.empty() ? std::string(prompt_template(o->tmpl)) : read_file(o->tmpl_file);
        provider = std::make_unique<LlmServiceProvider>(o->k, std::move(cfg));
        break;
      }
    }
    auto hyps = generate_all(*provider, queries, g_jobs);
    for (std::size_t i = 0; i < queries.size(); ++i) queries[i].hypotheses = std::move(hyps[i]);
    write_queries(queries, o->out);
  });
}

void add_retrieve(CLI::App& app) {
  struct Opts {
    std::string index, queries, out_base, out_hyps, query_embeddings;
    std::size_t depth = 100;
    ServiceOptions svc;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("retrieve", "Retrieve runs for queries and hypotheses");
  sub->add_option("--index", o->index, "Lexical or dense index file")->required();
  sub->add_option("--queries", o->queries, "Queries JSONL (with hypotheses)")->required();
  sub->add_option("--out-base", o->out_base, "Run file for the original queries")->required();
  sub->add_option("--out-hyps", o->out_hyps, "Run file for hypotheses (qid::h<k> keys)");
  sub->add_option("--depth", o->depth, "Documents per input")->capture_default_str();
  sub->add_option("--query-embeddings", o->query_embeddings, "Query vectors (dense index)");
  o->svc.add(sub, "");
  sub->callback([o] {
    const auto queries = load_queries(o->queries);
    auto r = open_retriever(o->index, queries, o->query_embeddings, o->svc);
    const auto bundles = retrieve_bundles(*r->retriever, queries, o->depth, g_jobs);
    std::vector<RunList> base;
    std::vector<RunList> hyps;
    for (const auto& b : bundles) {
      base.push_back(b.base_run);
      for (std::size_t k = 0; k < b.hyp_runs.size(); ++k) {
        const auto e = b.hyp_runs[k].entries();
        hyps.emplace_back(input_key(b.qid, k + 1), std::vector<ScoredDoc>(e.begin(), e.end()));
      }
    }
    const std::string tag(r->retriever->name());
    write_run(base, o->out_base, tag);
    if (!o->out_hyps.empty()) write_run(hyps, o->out_hyps, tag);
  });
}

void add_aggregate(CLI::App& app) {
  struct Opts {
    BundleOptions b;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("aggregate", "Fuse base and hypothesis runs");
  o->b.add(sub, true);
  sub->add_option("--pooling", o->b.pooling,
                  "anchored-max, unanchored-max, unanchored-mean or unanchored-median")
      ->capture_default_str();
  sub->add_option("--out", o->out, "Output run file (default stdout)");
  sub->callback([o] {
    const AggregationConfig cfg = o->b.config();
    const LoadedBundles lb = load_bundles(o->b, cfg);
    const auto runs = aggregate_all(lb.bundles, cfg, g_jobs, lb.rescorers);
    emit(format_run(runs, cfg.label()), o->out);
  });
}

struct EvalFlags {
  std::string qrels;
  std::string cutoffs = "1,5,10";
  std::size_t rank_cutoff = 10;
  std::string csv;

  void add(CLI::App* app) {
    app->add_option("--qrels", qrels, "TREC qrels")->required();
    app->add_option("--cutoffs", cutoffs, "Recall cutoffs")->capture_default_str();
    app->add_option("--rank-cutoff", rank_cutoff, "Cutoff for MRR and nDCG")
        ->capture_default_str();
    app->add_option("--csv", csv, "Write the table as CSV here");
  }
  EvalOptions options() const {
    EvalOptions e;
    e.recall_cutoffs = parse_sizes(cutoffs);
    e.rank_cutoff = rank_cutoff;
    e.jobs = g_jobs;
    return e;
  }
};

void add_eval(CLI::App& app) {
  struct Opts {
    std::string run, queries;
    EvalFlags e;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("eval", "Recall, MRR and nDCG of a run");
  sub->add_option("--run", o->run, "Run file")->required();
  sub->add_option("--queries", o->queries, "Evaluate every query of this JSONL");
  o->e.add(sub);
  sub->callback([o] {
    const auto runs = read_run(o->run);
    std::vector<std::string> universe;
    if (!o->queries.empty()) {
      for (const auto& q : load_queries(o->queries)) universe.push_back(q.qid);
    }
    const auto rep = evaluate_run(runs, load_qrels(o->e.qrels), o->e.options(),
                                  o->queries.empty() ? nullptr : &universe);
    std::cout << rep.to_text();
    if (!o->e.csv.empty()) write_file(o->e.csv, rep.to_csv());
  });
}

void add_ttest(CLI::App& app) {
  struct Opts {
    std::string a, b, qrels, metric = "mrr";
    std::size_t cutoff = 10;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("ttest", "Two-sided paired t-test between two runs");
  sub->add_option("--run-a", o->a)->required();
  sub->add_option("--run-b", o->b)->required();
  sub->add_option("--qrels", o->qrels)->required();
  sub->add_option("--metric", o->metric, "mrr or ndcg")->capture_default_str();
  sub->add_option("--cutoff", o->cutoff)->capture_default_str();
  sub->callback([o] {
    const Metric m = parse_metric(o->metric);
    if (m == Metric::kRecall) throw ValidationError("t-tests run on mrr or ndcg only");
    const Qrels qrels = load_qrels(o->qrels);
    const auto ra = evaluate_metric(read_run(o->a), qrels, m, o->cutoff);
    const auto rb = evaluate_metric(read_run(o->b), qrels, m, o->cutoff);
    const auto t = paired_ttest(ra.per_query, rb.per_query);
    std::printf("metric %s@%zu\nn %zu\nmean_a %.6f\nmean_b %.6f\nmean_diff %.6f\nt %.6f\np %.6g\n",
                o->metric.c_str(), o->cutoff, t.n, ra.mean, rb.mean, t.mean_diff, t.t_stat,
                t.p_value);
  });
}

void add_experiment(CLI::App& app, const std::string& name, const std::string& help) {
  struct Opts {
    BundleOptions b;
    EvalFlags e;
    std::string grid;
    std::string ks = "0,1,2,3,4,5";
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand(name, help);
  o->b.add(sub, name != "sweep-alpha");
  o->e.add(sub);
  if (name == "sweep-alpha") sub->add_option("--grid", o->grid, "Comma-separated alphas");
  if (name == "ablate-k") sub->add_option("--ks", o->ks, "K values")->capture_default_str();
  sub->callback([o, name] {
    const AggregationConfig cfg = o->b.config();
    const LoadedBundles lb = load_bundles(o->b, cfg);
    const Qrels qrels = load_qrels(o->e.qrels);
    ExperimentOptions opts;
    opts.eval = o->e.options();
    opts.rescorers = lb.rescorers;
    ExperimentTable t;
    if (name == "sweep-alpha") {
      std::vector<double> grid = alpha_grid();
      if (!o->grid.empty()) {
        grid.clear();
        std::size_t start = 0;
        while (start <= o->grid.size()) {
          auto end = o->grid.find(',', start);
          if (end == std::string::npos) end = o->grid.size();
          if (end > start) grid.push_back(std::stod(o->grid.substr(start, end - start)));
          start = end + 1;
        }
      }
      t = sweep_alpha(lb.bundles, cfg, qrels, grid, opts);
    } else if (name == "ablate-k") {
      t = ablate_k(lb.bundles, parse_sizes(o->ks), cfg, qrels, opts);
    } else {
      t = ablate_pooling(lb.bundles, cfg, qrels, opts);
    }
    std::cout << t.to_text();
    if (!o->e.csv.empty()) write_file(o->e.csv, t.to_csv());
  });
}

void add_simulate(CLI::App& app) {
  struct Opts {
    std::string corpus, level = "L2", out_queries, out_qrels, report;
    std::size_t n = 200, min_chars = 8, max_chars = 50;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("simulate", "Build a corrupted-query benchmark from a corpus");
  sub->add_option("--corpus", o->corpus)->required();
  sub->add_option("--level", o->level, "L1, L2, L3 or H")->capture_default_str();
  sub->add_option("--n", o->n, "Number of queries")->capture_default_str();
  sub->add_option("--seed", o->seed)->capture_default_str();
  sub->add_option("--min-chars", o->min_chars)->capture_default_str();
  sub->add_option("--max-chars", o->max_chars)->capture_default_str();
  sub->add_option("--out-queries", o->out_queries)->required();
  sub->add_option("--out-qrels", o->out_qrels)->required();
  sub->add_option("--report", o->report, "Faithfulness CSV");
  sub->callback([o] {
    SimulationConfig cfg;
    cfg.queries = o->n;
    cfg.level = noise_level(o->level);
    cfg.seed = o->seed;
    cfg.min_chars = o->min_chars;
    cfg.max_chars = o->max_chars;
    const Benchmark b = simulate(load_corpus(o->corpus), cfg);
    write_queries(b.queries, o->out_queries);
    write_qrels(b.qrels, o->out_qrels);
    std::cout << b.report.to_text();
    if (!o->report.empty()) write_file(o->report, b.report.to_csv());
  });
}

void add_faithfulness(CLI::App& app) {
  struct Opts {
    std::string queries, corpus, csv;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("faithfulness-stats", "Query-to-gold faithfulness summary");
  sub->add_option("--queries", o->queries, "Queries JSONL with gold")->required();
  sub->add_option("--corpus", o->corpus)->required();
  sub->add_option("--csv", o->csv);
  sub->callback([o] {
    const auto rep = faithfulness_report(load_queries(o->queries), load_corpus(o->corpus));
    std::cout << rep.to_text();
    if (!o->csv.empty()) write_file(o->csv, rep.to_csv());
  });
}

int g_exit = 0;

void add_pipeline(CLI::App& app) {
  struct Opts {
    std::string config, out;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("pipeline", "Run every stage from one config file");
  sub->add_option("--config", o->config, "TOML-style key = value file");
  sub->add_option("--set", o->sets, "Override, key=value (repeatable)");
  sub->add_option("--seed", o->seed, "Root seed");
  sub->add_option("--out", o->out, "Output directory");
  sub->callback([o, sub] {
    ConfigMap map = o->config.empty() ? ConfigMap() : ConfigMap::load(o->config);
    for (const auto& s : o->sets) map.apply_override(s);
    if (o->seed) map.set("seed", std::to_string(*o->seed));
    if (!o->out.empty()) map.set("output_dir", o->out);
    if (sub->get_parent()->get_option("--jobs")->count() > 0) {
      map.set("jobs", std::to_string(g_jobs));
    }
    const PipelineResult r = run_pipeline(PipelineConfig::from_map(map));
    for (const auto& s : r.stages) {
      std::printf("%-16s %s\n", s.name.c_str(), std::string(to_string(s.status)).c_str());
    }
    std::printf("manifest %s\n", r.manifest.string().c_str());
    if (!r.ok) {
      std::fprintf(stderr, "error: %s\n", r.error.c_str());
      g_exit = 1;
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieval with hypothesis aggregation"};
  app.require_subcommand(1);
  app.fallthrough();
  // stdout carries runs and tables, so logs go to stderr.
  spdlog::set_default_logger(spdlog::stderr_color_mt("quark"));
  std::string log_level = "warn";
  app.add_option("--jobs", g_jobs, "Worker threads for per-query work")->capture_default_str();
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->capture_default_str();

  add_synth_corpus(app);
  add_index_lexical(app);
  add_index_dense(app);
  add_hypothesize(app);
  add_retrieve(app);
  add_aggregate(app);
  add_eval(app);
  add_ttest(app);
  add_experiment(app, "sweep-alpha", "Metrics across a grid of alphas");
  add_experiment(app, "ablate-k", "Metrics for the first K hypotheses");
  add_experiment(app, "ablate-pooling", "Anchored aggregation against unanchored pooling");
  add_simulate(app);
  add_faithfulness(app);
  add_pipeline(app);

  app.parse_complete_callback([&] {
    spdlog::set_level(spdlog::level::from_str(log_level));
    g_jobs = std::max<std::size_t>(1, g_jobs);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const quark::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return g_exit;
}
