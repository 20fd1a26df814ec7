// exrec: command-line front end for the expert recommendation cascade.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "exrec/exrec.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Streaming content hash of a file; IoError if unreadable.
std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw exrec::IoError("cannot open '" + path.string() + "'");
  exrec::Fnv1a64 h;
  std::string buf(1 << 16, '\0');
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
  }
  return h.hex();
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    exrec::write_text_file(out, text);
}

struct Common {
  std::uint64_t seed = 42;
  unsigned threads = 1;
};

struct IngestArgs {
  std::string posts, users, out, from, to;
};

struct IndexArgs {
  std::string store, out, idf = "smoothed", stopwords;
  double test_fraction = 0.2;
};

struct GraphArgs {
  std::string store, out, edges;
  double d = 0.85, tol = 1e-8;
  std::size_t max_iter = 100;
  bool weighted = false;
};

// Shared by recommend, explain and evaluate.
struct RankArgs {
  std::string store, index, scores, stopwords;
  double alpha = 0.5;
  std::size_t k_posts = 50, k_users = 20;
  double d = 0.85;
  std::int64_t accept_threshold = 15;
  bool or_accepted = false;
  std::string precision = "coverage", scope = "candidates";
  std::vector<double> weights = {1, 1, 1, 1};
};

struct RecommendArgs {
  std::string query, format = "table", out;
  std::size_t top = 0;
  std::int64_t user = 0;
};

struct EvaluateArgs {
  std::string queries, out, plot_data;
  double relevance_threshold = 0.5;
  std::size_t stats_depth = 5;
};

struct SynthArgs {
  std::string out;
  std::size_t topics = 5, users = 60, questions = 30;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "seed for every random split");
  cmd->add_option("--threads", c.threads, "worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 256u));
}

void add_rank_options(CLI::App* cmd, RankArgs& a) {
  cmd->add_option("--store", a.store, "store directory written by ingest")->required();
  cmd->add_option("--index", a.index, "index file (default <store>/index.jsonl)");
  cmd->add_option("--scores", a.scores, "ER scores file (default <store>/er_scores.txt)");
  cmd->add_option("--stopwords", a.stopwords, "stopword file (default: built-in SMART list)");
  cmd->add_option("--alpha", a.alpha, "fusion weight on normalized ER")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--k-posts", a.k_posts, "answer posts kept in phase 1")->check(CLI::PositiveNumber);
  cmd->add_option("--k-users", a.k_users, "candidate experts kept in phase 1")->check(CLI::PositiveNumber);
  cmd->add_option("--d", a.d, "damping factor the scores must have been computed with");
  cmd->add_option("--accept-threshold", a.accept_threshold, "minimum score of an accepted answer");
  cmd->add_flag("--or-accepted-flag", a.or_accepted, "also count answers accepted by the asker");
  cmd->add_option("--precision", a.precision, "test precision: coverage or cosine")
      ->check(CLI::IsMember({"coverage", "cosine"}));
  cmd->add_option("--significance-scope", a.scope, "feature normalization: candidates or community")
      ->check(CLI::IsMember({"candidates", "community"}));
  cmd->add_option("--feature-weights", a.weights,
                  "weights of acceptance ratio, avg score, avg views, avg favorites")
      ->expected(4);
}

// The list must outlive any pipeline built on it, hence the heap holder.
const exrec::text::StopwordList& stopwords_for(
    const std::string& file, std::unique_ptr<exrec::text::StopwordList>& holder) {
  if (file.empty()) return exrec::text::StopwordList::smart_english();
  holder = std::make_unique<exrec::text::StopwordList>(
      exrec::text::StopwordList::from_file(file));
  return *holder;
}

// Loaded, cross-checked artifacts for the query commands.
struct Artifacts {
  exrec::CorpusStore store;
  exrec::RelevanceIndex index;
  exrec::ErScores scores;
  std::string scores_hash;
  std::unique_ptr<exrec::text::StopwordList> stopword_holder;
  std::optional<exrec::text::TextPipeline> pipeline;
};

Artifacts load_artifacts(const RankArgs& a, const Common& c) {
  Artifacts art;
  const fs::path store_dir = a.store;
  const fs::path index_file = a.index.empty() ? store_dir / "index.jsonl" : fs::path(a.index);
  const fs::path scores_file = a.scores.empty() ? store_dir / "er_scores.txt" : fs::path(a.scores);
  art.store = exrec::load_store(store_dir);
  art.index = exrec::load_index(index_file);
  if (art.index.store_hash != art.store.hash())
    throw exrec::IntegrityError("index " + index_file.string() + " was built from store " +
                                art.index.store_hash + " but the store hash is " +
                                art.store.hash());
  const std::string scores_text = exrec::read_text_file(scores_file);
  art.scores = exrec::parse_scores(scores_text).scores;
  art.scores_hash = exrec::content_hash(scores_text);
  if (art.scores.store_hash != art.store.hash())
    throw exrec::IntegrityError("scores " + scores_file.string() + " were computed from store " +
                                art.scores.store_hash + " but the store hash is " +
                                art.store.hash());
  if (art.index.options.seed != c.seed)
    throw exrec::IntegrityError("index was split with seed " +
                                std::to_string(art.index.options.seed) + " but --seed is " +
                                std::to_string(c.seed));
  art.pipeline.emplace(stopwords_for(a.stopwords, art.stopword_holder));
  const auto text = art.pipeline->manifest();
  if (json(art.index.text_manifest) != text)
    throw exrec::IntegrityError("index text pipeline " +
                                exrec::content_hash(json(art.index.text_manifest).dump()) +
                                " differs from the query pipeline " +
                                exrec::content_hash(text.dump()));
  return art;
}

exrec::FusionConfig fusion_config(const RankArgs& a, const Common& c) {
  exrec::FusionConfig f;
  f.alpha = a.alpha;
  f.k_posts = a.k_posts;
  f.k_users = a.k_users;
  f.d = a.d;
  f.seed = c.seed;
  f.accept_threshold = a.accept_threshold;
  f.or_accepted_flag = a.or_accepted;
  f.precision = a.precision == "cosine" ? exrec::PrecisionMode::Cosine
                                        : exrec::PrecisionMode::TermCoverage;
  f.scope = a.scope == "community" ? exrec::SignificanceScope::Community
                                   : exrec::SignificanceScope::Candidates;
  if (a.weights.size() != exrec::kFeatureCount)
    throw exrec::ArgumentError("--feature-weights needs four values");
  std::copy(a.weights.begin(), a.weights.end(), f.weights.begin());
  return f;
}

json inputs_json(const Artifacts& art) {
  json j;
  j["store_hash"] = art.store.hash();
  j["index_hash"] = art.index.manifest_hash();
  j["scores_hash"] = art.scores_hash;
  return j;
}

int cmd_ingest(const IngestArgs& a) {
  auto result = a.users.empty() ? exrec::ingest_dump(a.posts)
                                : exrec::ingest_dump(a.posts, a.users);
  json params;
  params["posts_hash"] = file_hash(a.posts);
  params["users_hash"] = a.users.empty() ? json(nullptr) : json(file_hash(a.users));
  params["from"] = a.from.empty() ? json(nullptr) : json(a.from);
  params["to"] = a.to.empty() ? json(nullptr) : json(a.to);
  exrec::CorpusStore store = std::move(result.store);
  if (!a.from.empty() || !a.to.empty()) {
    auto parse = [](const std::string& s, const char* flag) {
      auto t = exrec::Timestamp::parse(s);
      if (!t) throw exrec::ArgumentError(std::string("bad ") + flag + " date '" + s + "'");
      return *t;
    };
    const auto from = a.from.empty() ? exrec::Timestamp(INT64_MIN) : parse(a.from, "--from");
    const auto to = a.to.empty() ? exrec::Timestamp(INT64_MAX) : parse(a.to, "--to");
    store = exrec::date_filter(store, from, to);
  }
  auto summary = result.summary;
  summary.questions = store.question_count();
  summary.answers = store.answer_count();
  summary.orphans = store.orphan_count();
  exrec::save_store(a.out, store, summary, params);
  std::printf("rows       %zu\nquestions  %zu\nanswers    %zu\nskipped    %zu\n"
              "orphans    %zu\nusers      %zu\nstore      %s\n",
              summary.rows, summary.questions, summary.answers, summary.skipped,
              summary.orphans, summary.users, store.hash().c_str());
  return 0;
}

int cmd_index(const IndexArgs& a, const Common& c) {
  const auto store = exrec::load_store(a.store);
  std::unique_ptr<exrec::text::StopwordList> holder;
  const exrec::text::TextPipeline pipeline(stopwords_for(a.stopwords, holder));
  exrec::IndexOptions opts;
  opts.idf = exrec::idf_variant_from_string(a.idf);
  opts.test_fraction = a.test_fraction;
  opts.seed = c.seed;
  opts.threads = c.threads;
  const auto index = exrec::build_index(store, opts, pipeline);
  const fs::path out = a.out.empty() ? fs::path(a.store) / "index.jsonl" : fs::path(a.out);
  exrec::save_index(out, index);
  std::printf("documents  %lld\nterms      %zu\nindex      %s\n",
              static_cast<long long>(index.tfidf.doc_count()), index.tfidf.terms().size(),
              index.manifest_hash().c_str());
  return 0;
}

int cmd_graph(const GraphArgs& a, const Common& c) {
  const auto store = exrec::load_store(a.store);
  const auto built = exrec::build_graph(store);
  exrec::ErOptions opt;
  opt.d = a.d;
  opt.tol = a.tol;
  opt.max_iter = a.max_iter;
  opt.weighted = a.weighted;
  opt.threads = c.threads;
  auto scores = exrec::expertise_rank(built.graph, opt);
  scores.store_hash = store.hash();

  json header;
  header["kind"] = "er_scores";
  header["tol"] = a.tol;
  header["max_iter"] = a.max_iter;
  header["weighted"] = a.weighted;
  header["nodes"] = built.graph.node_count();
  header["edges"] = built.graph.edge_count();
  header["build"] = exrec::report_json(built.report);
  const fs::path out = a.out.empty() ? fs::path(a.store) / "er_scores.txt" : fs::path(a.out);
  exrec::write_text_file(out, exrec::scores_text(scores, header));
  if (!a.edges.empty()) {
    json eh;
    eh["kind"] = "qa_edges";
    eh["store_hash"] = store.hash();
    eh["columns"] = {"asker_id", "answerer_id", "weight"};
    exrec::write_text_file(a.edges, "# " + eh.dump() + "\n" + built.graph.edge_list());
  }
  std::printf("nodes      %zu\nedges      %zu\norphans    %zu\niterations %zu\nresidual   %.3g\n",
              built.graph.node_count(), built.graph.edge_count(), built.report.orphans,
              scores.iterations, scores.residual);
  if (!scores.converged)
    std::fprintf(stderr, "warning: ExpertiseRank did not converge in %zu iterations\n",
                 scores.iterations);
  return 0;
}

int cmd_recommend(const RankArgs& ra, const RecommendArgs& a, const Common& c) {
  auto art = load_artifacts(ra, c);
  const auto cfg = fusion_config(ra, c);
  const auto list = exrec::recommend(a.query, art.index, art.store, art.scores, cfg, *art.pipeline);
  if (a.format == "json") {
    auto j = exrec::to_json(list);
    j["inputs"] = inputs_json(art);
    emit(j.dump(2) + "\n", a.out);
  } else {
    json head;
    head["config"] = cfg.to_json();
    head["inputs"] = inputs_json(art);
    emit("# " + head.dump() + "\n" + exrec::format_table(list, a.top), a.out);
  }
  return 0;
}

int cmd_explain(const RankArgs& ra, const RecommendArgs& a, const Common& c) {
  auto art = load_artifacts(ra, c);
  const auto cfg = fusion_config(ra, c);
  const auto list = exrec::recommend(a.query, art.index, art.store, art.scores, cfg, *art.pipeline);
  const auto x = exrec::explain(list, a.user);
  json j;
  j["kind"] = "explanation";
  j["query"] = a.query;
  j["config"] = cfg.to_json();
  j["inputs"] = inputs_json(art);
  j["explanation"] = exrec::to_json(x);
  emit(j.dump(2) + "\n", a.out);
  return 0;
}

int cmd_evaluate(const RankArgs& ra, const EvaluateArgs& a, const Common& c) {
  auto art = load_artifacts(ra, c);
  const auto cfg = fusion_config(ra, c);
  const auto queries = exrec::parse_queries(exrec::read_text_file(a.queries));
  exrec::EvalOptions opt;
  opt.relevance_threshold = a.relevance_threshold;
  opt.stats_depth = a.stats_depth;
  opt.threads = c.threads;
  const auto report = exrec::evaluate(queries, cfg, art.store, art.index, art.scores, opt,
                                      *art.pipeline);
  auto inputs = inputs_json(art);
  inputs["queries_hash"] = file_hash(a.queries);
  auto j = exrec::to_json(report);
  j["inputs"] = inputs;
  if (!a.out.empty()) exrec::write_text_file(a.out, j.dump(2) + "\n");
  if (!a.plot_data.empty()) {
    json head;
    head["config"] = cfg.to_json();
    head["inputs"] = inputs;
    exrec::write_text_file(a.plot_data, "# " + head.dump() + "\n" + exrec::plot_csv(report));
  }
  std::cout << exrec::format_table(report);
  return 0;
}

int cmd_synth(const SynthArgs& a, const Common& c) {
  exrec::synthetic::Options opt;
  opt.topics = a.topics;
  opt.community_users = a.users;
  opt.questions_per_topic = a.questions;
  opt.seed = c.seed;
  const auto community = exrec::synthetic::generate(opt);
  const fs::path dir = a.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  exrec::write_text_file(dir / "Posts.xml", community.posts_xml);
  exrec::write_text_file(dir / "Users.xml", community.users_xml);
  std::string queries = "# synthetic queries, seed " + std::to_string(c.seed) +
                        "; tab-separated gold expert id\n";
  for (const auto& q : exrec::synthetic::topic_queries(community, c.seed))
    queries += q.text + "\t" + std::to_string(community.planted_experts[q.topic]) + "\n";
  exrec::write_text_file(dir / "queries.tsv", queries);
  std::printf("wrote %s, %s and %s\n", (dir / "Posts.xml").c_str(), (dir / "Users.xml").c_str(),
              (dir / "queries.tsv").c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expert recommendation for community question answering dumps"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "key=value config file; [section] per subcommand")
      ->envname("EXREC_CONFIG");
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  IngestArgs ingest;
  auto* ing = app.add_subcommand("ingest", "parse a Posts.xml/Users.xml dump into a store");
  ing->add_option("--posts", ingest.posts, "Posts.xml")->required();
  ing->add_option("--users", ingest.users, "Users.xml");
  ing->add_option("--out", ingest.out, "store directory")->required();
  ing->add_option("--from", ingest.from, "keep posts created on or after this date");
  ing->add_option("--to", ingest.to, "keep posts created on or before this date");

  IndexArgs index;
  auto* idx = app.add_subcommand("index", "build the TF-IDF relevance index");
  idx->add_option("--store", index.store, "store directory")->required();
  idx->add_option("--out", index.out, "index file (default <store>/index.jsonl)");
  idx->add_option("--idf", index.idf, "idf variant")->check(CLI::IsMember({"smoothed", "raw"}));
  idx->add_option("--test-fraction", index.test_fraction, "held-out share of each user's answers")
      ->check(CLI::Range(0.0, 1.0));
  idx->add_option("--stopwords", index.stopwords, "stopword file (default: built-in SMART list)");
  add_common(idx, common);

  GraphArgs graph;
  auto* gr = app.add_subcommand("graph", "build the asker->answerer graph and ExpertiseRank");
  gr->add_option("--store", graph.store, "store directory")->required();
  gr->add_option("--out", graph.out, "scores file (default <store>/er_scores.txt)");
  gr->add_option("--edges", graph.edges, "also write the edge list here");
  gr->add_option("--d", graph.d, "damping factor");
  gr->add_option("--tol", graph.tol, "max-norm convergence tolerance");
  gr->add_option("--max-iter", graph.max_iter, "iteration cap");
  gr->add_flag("--weighted", graph.weighted, "split ER along edges by answer counts");
  add_common(gr, common);

  RankArgs rank;
  RecommendArgs rec;
  auto* rc = app.add_subcommand("recommend", "rank experts for a question");
  add_rank_options(rc, rank);
  rc->add_option("--query", rec.query, "question text")->required();
  rc->add_option("--top", rec.top, "rows to print in table format (0 = all)");
  rc->add_option("--format", rec.format, "table or json")->check(CLI::IsMember({"table", "json"}));
  rc->add_option("--out", rec.out, "output file (default stdout)");
  add_common(rc, common);

  auto* ex = app.add_subcommand("explain", "per-phase scores and ranks of one user");
  add_rank_options(ex, rank);
  ex->add_option("--query", rec.query, "question text")->required();
  ex->add_option("--user", rec.user, "user id")->required();
  ex->add_option("--out", rec.out, "output file (default stdout)");
  add_common(ex, common);

  EvaluateArgs eval;
  auto* ev = app.add_subcommand("evaluate", "P@n, AP and MAP over a queries file");
  add_rank_options(ev, rank);
  ev->add_option("--queries", eval.queries, "one query per line, optional tab + gold user ids")
      ->required();
  ev->add_option("--out", eval.out, "JSON report file");
  ev->add_option("--plot-data", eval.plot_data, "per-rank precision CSV");
  ev->add_option("--relevance-threshold", eval.relevance_threshold,
                 "test-bag coverage that makes an expert relevant without gold ids")
      ->check(CLI::Range(0.0, 1.0));
  ev->add_option("--stats-depth", eval.stats_depth, "top experts averaged in side columns");
  add_common(ev, common);

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth", "write a synthetic dump with planted experts");
  sy->add_option("--out", synth.out, "output directory")->required();
  sy->add_option("--topics", synth.topics, "topics, one planted expert each");
  sy->add_option("--users", synth.users, "ordinary community members");
  sy->add_option("--questions", synth.questions, "questions per topic");
  add_common(sy, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (ing->parsed()) return cmd_ingest(ingest);
    if (idx->parsed()) return cmd_index(index, common);
    if (gr->parsed()) return cmd_graph(graph, common);
    if (rc->parsed()) return cmd_recommend(rank, rec, common);
    if (ex->parsed()) return cmd_explain(rank, rec, common);
    if (ev->parsed()) return cmd_evaluate(rank, eval, common);
    if (sy->parsed()) return cmd_synth(synth, common);
  } catch (const exrec::Error& e) {
    std::fprintf(stderr, "exrec: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "exrec: %s\n", e.what());
    return 1;
  }
  return 1;
}
