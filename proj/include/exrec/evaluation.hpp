#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "exrec/error.hpp"
#include "exrec/parallel.hpp"
#include "exrec/ranking.hpp"

namespace exrec {

/// |top-n ∩ relevant| / n; slots past the end of the list count as misses.
inline double precision_at_n(const std::vector<UserId>& ranked,
                             const std::set<UserId>& relevant, std::size_t n) {
  if (n < 1) throw ArgumentError("precision cutoff must be at least 1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(n, ranked.size()); ++i)
    if (relevant.count(ranked[i])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(n);
}

/// (1/|R|) * sum over relevant positions j of (relevant hits in 1..j) / j.
inline double average_precision(const std::vector<UserId>& ranked,
                                const std::set<UserId>& relevant) {
  if (relevant.empty()) throw PreconditionError("average precision needs a relevant set");
  double sum = 0;
  std::size_t hits = 0;
  for (std::size_t j = 0; j < ranked.size(); ++j) {
    if (!relevant.count(ranked[j])) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(j + 1);
  }
  return sum / static_cast<double>(relevant.size());
}

inline double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Spearman rank correlation with average ranks for ties; nullopt when
/// either side is constant or there are fewer than two points.
inline std::optional<double> spearman(const std::vector<double>& x,
                                      const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = (static_cast<double>(i + j) / 2.0) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double mx = mean(rx), my = mean(ry);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

struct QuerySpec {
  std::string query_id;
  std::string text;
  std::optional<std::set<UserId>> gold_experts;
};

/// One query per line; after an optional tab, gold user ids separated by
/// tabs, commas or spaces. Blank lines and lines starting with '#' are
/// ignored. Query ids are q1, q2, ... in file order.
inline std::vector<QuerySpec> parse_queries(std::string_view text) {
  std::vector<QuerySpec> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t line_start = pos;
    auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    QuerySpec q;
    q.query_id = "q" + std::to_string(out.size() + 1);
    const auto tab = line.find('\t');
    q.text = std::string(line.substr(0, tab));
    if (tab != std::string_view::npos) {
      std::set<UserId> gold;
      std::string tok;
      auto flush = [&] {
        if (tok.empty()) return;
        std::size_t used = 0;
        long long v = 0;
        try {
          v = std::stoll(tok, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != tok.size())
          throw ParseError("bad gold user id '" + tok + "'", line_start + tab);
        gold.insert(v);
        tok.clear();
      };
      for (char c : line.substr(tab + 1)) {
        if (c == '\t' || c == ',' || c == ' ')
          flush();
        else
          tok += c;
      }
      flush();
      q.gold_experts = std::move(gold);
    }
    out.push_back(std::move(q));
  }
  return out;
}

struct EvalOptions {
  double relevance_threshold = 0.5;  // test-bag coverage for the default rule
  std::size_t stats_depth = 5;       // top experts averaged for the side columns
  unsigned threads = 1;
};

inline constexpr std::array<std::size_t, 4> kCutoffs = {1, 5, 10, 20};

struct PhaseMetrics {
  std::array<double, 4> p_at{};  // P@1, P@5, P@10, P@20
  double ap = 0;
  std::vector<double> precision_curve;  // P@r for r = 1..20
};

/// Table 2-style row: one candidate seen through each phase.
struct RankComparison {
  UserId user_id = 0;
  std::size_t phase1_rank = 0;
  std::size_t final_rank = 0;
  std::optional<std::int64_t> dump_reputation;
  std::size_t reputation_rank = 0;  // among candidates with known reputation
};

struct QueryResult {
  std::string query_id;
  std::string text;
  bool skipped = false;
  std::string skip_reason;
  std::string relevance_source;  // "gold" or "test_coverage"
  std::size_t candidates = 0;
  std::vector<UserId> relevant;
  PhaseMetrics phase1, final;
  double top_acceptance_ratio = 0;   // mean over the top stats_depth experts
  double top_heldout_score = 0;      // mean held-out answer score, same experts
  std::optional<double> spearman_reputation;  // fused score vs dump reputation
  std::vector<RankComparison> ranks;
};

struct EvalReport {
  std::vector<QueryResult> queries;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  double map_phase1 = 0;
  double map_final = 0;
  std::array<double, 4> mean_p_phase1{};
  std::array<double, 4> mean_p_final{};
  FusionConfig config;
  EvalOptions options;
  std::string store_hash;
  std::string index_hash;
};

namespace detail {

inline PhaseMetrics phase_metrics(const std::vector<UserId>& ranked,
                                  const std::set<UserId>& relevant) {
  PhaseMetrics m;
  for (std::size_t i = 0; i < kCutoffs.size(); ++i)
    m.p_at[i] = precision_at_n(ranked, relevant, kCutoffs[i]);
  m.ap = average_precision(ranked, relevant);
  for (std::size_t r = 1; r <= 20; ++r)
    m.precision_curve.push_back(precision_at_n(ranked, relevant, r));
  return m;
}

inline double heldout_score(const CorpusStore& store, const ExpertProfile* p) {
  if (!p || p->test_posts.empty()) return 0.0;
  double s = 0;
  for (PostId id : p->test_posts) s += static_cast<double>(store.find_post(id)->score);
  return s / static_cast<double>(p->test_posts.size());
}

inline QueryResult evaluate_one(const QuerySpec& q, const RelevanceIndex& index,
                                const CorpusStore& store, const ErScores& scores,
                                const FusionConfig& cfg, const EvalOptions& opt,
                                const text::TextPipeline& pipeline,
                                const std::vector<ReputationFeatures>* community) {
  QueryResult r;
  r.query_id = q.query_id;
  r.text = q.text;
  RankedExpertList list;
  try {
    list = recommend(q.text, index, store, scores, cfg, pipeline, community);
  } catch (const EmptyQueryError&) {
    r.skipped = true;
    r.skip_reason = "query has no content terms";
    return r;
  }
  r.candidates = list.entries.size();

  std::set<UserId> relevant;
  if (q.gold_experts) {
    r.relevance_source = "gold";
    relevant = *q.gold_experts;
  } else {
    r.relevance_source = "test_coverage";
    for (const auto& e : list.entries) {
      const auto* p = index.profile(e.user_id);
      if (p && term_coverage(list.query_terms, p->test_bag) >= opt.relevance_threshold)
        relevant.insert(e.user_id);
    }
  }
  r.relevant.assign(relevant.begin(), relevant.end());
  if (relevant.empty()) {
    r.skipped = true;
    r.skip_reason = "no relevant experts";
    return r;
  }

  std::vector<UserId> final_order, phase1_order(list.entries.size());
  for (const auto& e : list.entries) {
    final_order.push_back(e.user_id);
    phase1_order[e.phase1_rank - 1] = e.user_id;
  }
  r.phase1 = phase_metrics(phase1_order, relevant);
  r.final = phase_metrics(final_order, relevant);

  std::vector<double> acc, held;
  for (std::size_t i = 0; i < std::min(opt.stats_depth, list.entries.size()); ++i) {
    acc.push_back(list.entries[i].features.acceptance_ratio);
    held.push_back(heldout_score(store, index.profile(list.entries[i].user_id)));
  }
  r.top_acceptance_ratio = mean(acc);
  r.top_heldout_score = mean(held);

  std::vector<double> fused, rep;
  for (const auto& e : list.entries)
    if (e.dump_reputation) {
      fused.push_back(e.fused_score);
      rep.push_back(static_cast<double>(*e.dump_reputation));
    }
  r.spearman_reputation = spearman(fused, rep);

  for (const auto& e : list.entries) {
    RankComparison c;
    c.user_id = e.user_id;
    c.phase1_rank = e.phase1_rank;
    c.final_rank = e.final_rank;
    c.dump_reputation = e.dump_reputation;
    if (e.dump_reputation) {
      c.reputation_rank = 1;
      for (const auto& o : list.entries)
        if (o.dump_reputation && (*o.dump_reputation > *e.dump_reputation ||
                                  (*o.dump_reputation == *e.dump_reputation &&
                                   o.user_id < e.user_id)))
          ++c.reputation_rank;
    }
    r.ranks.push_back(c);
  }
  return r;
}

}  // namespace detail

/// Runs every query through the cascade and scores both the phase-1 and the
/// fused rankings against the same relevant set.
inline EvalReport evaluate(const std::vector<QuerySpec>& queries, const FusionConfig& cfg,
                           const CorpusStore& store, const RelevanceIndex& index,
                           const ErScores& scores, const EvalOptions& opt = {},
                           const text::TextPipeline& pipeline = text::TextPipeline()) {
  if (queries.empty()) throw ArgumentError("evaluation needs at least one query");
  cfg.validate();
  EvalReport rep;
  rep.config = cfg;
  rep.options = opt;
  rep.store_hash = store.hash();
  rep.index_hash = index.manifest_hash();

  std::vector<ReputationFeatures> community;
  if (cfg.scope == SignificanceScope::Community)
    community = community_features(store, cfg.reputation_options(), opt.threads);
  const auto* community_ptr = cfg.scope == SignificanceScope::Community ? &community : nullptr;

  rep.queries.resize(queries.size());
  parallel_for(queries.size(), opt.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      rep.queries[i] = detail::evaluate_one(queries[i], index, store, scores, cfg, opt,
                                            pipeline, community_ptr);
  });

  std::vector<double> ap1, apf;
  std::array<std::vector<double>, 4> p1, pf;
  for (const auto& q : rep.queries) {
    if (q.skipped) {
      ++rep.skipped;
      continue;
    }
    ++rep.evaluated;
    ap1.push_back(q.phase1.ap);
    apf.push_back(q.final.ap);
    for (std::size_t k = 0; k < 4; ++k) {
      p1[k].push_back(q.phase1.p_at[k]);
      pf[k].push_back(q.final.p_at[k]);
    }
  }
  rep.map_phase1 = mean(ap1);
  rep.map_final = mean(apf);
  for (std::size_t k = 0; k < 4; ++k) {
    rep.mean_p_phase1[k] = mean(p1[k]);
    rep.mean_p_final[k] = mean(pf[k]);
  }
  return rep;
}

inline nlohmann::ordered_json to_json(const PhaseMetrics& m) {
  nlohmann::ordered_json j;
  j["p_at_1"] = m.p_at[0];
  j["p_at_5"] = m.p_at[1];
  j["p_at_10"] = m.p_at[2];
  j["p_at_20"] = m.p_at[3];
  j["ap"] = m.ap;
  return j;
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["kind"] = "evaluation_report";
  j["store_hash"] = r.store_hash;
  j["index_hash"] = r.index_hash;
  j["config"] = r.config.to_json();
  j["relevance_threshold"] = r.options.relevance_threshold;
  j["stats_depth"] = r.options.stats_depth;
  j["evaluated"] = r.evaluated;
  j["skipped"] = r.skipped;
  j["map_phase1"] = r.map_phase1;
  j["map_final"] = r.map_final;
  j["mean_p_phase1"] = r.mean_p_phase1;
  j["mean_p_final"] = r.mean_p_final;
  auto qs = nlohmann::ordered_json::array();
  for (const auto& q : r.queries) {
    nlohmann::ordered_json o;
    o["query_id"] = q.query_id;
    o["text"] = q.text;
    o["skipped"] = q.skipped;
    if (q.skipped) {
      o["skip_reason"] = q.skip_reason;
      qs.push_back(std::move(o));
      continue;
    }
    o["relevance_source"] = q.relevance_source;
    o["candidates"] = q.candidates;
    o["relevant"] = q.relevant;
    o["phase1"] = to_json(q.phase1);
    o["final"] = to_json(q.final);
    o["top_acceptance_ratio"] = q.top_acceptance_ratio;
    o["top_heldout_score"] = q.top_heldout_score;
    o["spearman_reputation"] = q.spearman_reputation
                                   ? nlohmann::ordered_json(*q.spearman_reputation)
                                   : nlohmann::ordered_json(nullptr);
    auto rows = nlohmann::ordered_json::array();
    for (const auto& c : q.ranks) {
      nlohmann::ordered_json row;
      row["user_id"] = c.user_id;
      row["phase1_rank"] = c.phase1_rank;
      row["final_rank"] = c.final_rank;
      row["dump_reputation"] = c.dump_reputation
                                   ? nlohmann::ordered_json(*c.dump_reputation)
                                   : nlohmann::ordered_json(nullptr);
      row["reputation_rank"] = c.reputation_rank;
      rows.push_back(std::move(row));
    }
    o["rank_comparison"] = std::move(rows);
    qs.push_back(std::move(o));
  }
  j["queries"] = std::move(qs);
  return j;
}

inline std::string format_table(const EvalReport& r) {
  std::string out;
  char line[192];
  std::snprintf(line, sizeof line, "%-6s %5s | %6s %6s %6s %6s %6s | %6s %6s %6s %6s %6s | %7s %8s\n",
                "query", "cand", "P1@1", "P1@5", "P1@10", "P1@20", "AP1", "P@1", "P@5",
                "P@10", "P@20", "AP", "accept", "heldout");
  out += line;
  for (const auto& q : r.queries) {
    if (q.skipped) {
      out += q.query_id + "  skipped: " + q.skip_reason + "\n";
      continue;
    }
    std::snprintf(line, sizeof line,
                  "%-6s %5zu | %6.3f %6.3f %6.3f %6.3f %6.3f | %6.3f %6.3f %6.3f %6.3f %6.3f | %7.3f %8.2f\n",
                  q.query_id.c_str(), q.candidates, q.phase1.p_at[0], q.phase1.p_at[1],
                  q.phase1.p_at[2], q.phase1.p_at[3], q.phase1.ap, q.final.p_at[0],
                  q.final.p_at[1], q.final.p_at[2], q.final.p_at[3], q.final.ap,
                  q.top_acceptance_ratio, q.top_heldout_score);
    out += line;
  }
  std::snprintf(line, sizeof line, "MAP phase1 %.4f  MAP final %.4f  (%zu evaluated, %zu skipped)\n",
                r.map_phase1, r.map_final, r.evaluated, r.skipped);
  out += line;
  return out;
}

/// query_id,phase,rank,precision rows for rank 1..20.
inline std::string plot_csv(const EvalReport& r) {
  std::string out = "query_id,phase,rank,precision\n";
  for (const auto& q : r.queries) {
    if (q.skipped) continue;
    for (const auto* phase : {"phase1", "final"}) {
      const auto& curve = std::string_view(phase) == "final" ? q.final.precision_curve
                                                             : q.phase1.precision_curve;
      for (std::size_t i = 0; i < curve.size(); ++i)
        out += q.query_id + ',' + phase + ',' + std::to_string(i + 1) + ',' +
               format_double(curve[i]) + '\n';
    }
  }
  return out;
}

}  // namespace exrec
