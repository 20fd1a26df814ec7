#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "exrec/error.hpp"
#include "exrec/graph.hpp"
#include "exrec/matcher.hpp"
#include "exrec/reputation.hpp"

namespace exrec {

enum class SignificanceScope {
  Candidates,  // normalize features over the phase-1 candidates
  Community,   // normalize over every user with at least one answer
};

struct FusionConfig {
  double alpha = 0.5;  // weight on normalized ER; 1 - alpha on significance
  std::size_t k_posts = 50;
  std::size_t k_users = 20;
  double d = 0.85;
  double tol = 1e-8;
  std::size_t max_iter = 100;
  bool weighted_graph = false;
  std::uint64_t seed = 42;
  std::int64_t accept_threshold = 15;
  bool or_accepted_flag = false;
  PrecisionMode precision = PrecisionMode::TermCoverage;
  SignificanceScope scope = SignificanceScope::Candidates;
  FeatureWeights weights = kEqualWeights;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in [0, 1]");
    if (!(d > 0.0 && d < 1.0)) throw ArgumentError("d must lie in (0, 1)");
    if (k_posts == 0 || k_users == 0) throw ArgumentError("k_posts and k_users must be positive");
  }

  MatchOptions match_options() const { return {k_posts, k_users, precision}; }
  ReputationOptions reputation_options() const {
    return {accept_threshold, or_accepted_flag};
  }
  ErOptions er_options(unsigned threads = 1) const {
    return {d, tol, max_iter, weighted_graph, threads};
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["alpha"] = alpha;
    j["k_posts"] = k_posts;
    j["k_users"] = k_users;
    j["d"] = d;
    j["tol"] = tol;
    j["max_iter"] = max_iter;
    j["weighted_graph"] = weighted_graph;
    j["seed"] = seed;
    j["accept_threshold"] = accept_threshold;
    j["or_accepted_flag"] = or_accepted_flag;
    j["precision"] = precision == PrecisionMode::TermCoverage ? "term_coverage" : "cosine";
    j["significance_scope"] = scope == SignificanceScope::Candidates ? "candidates" : "community";
    j["feature_weights"] = weights;
    return j;
  }
};

struct RankedExpert {
  UserId user_id = 0;
  std::size_t phase1_rank = 0;
  double relevance_score = 0;
  double test_precision = 0;
  double er_score = 0;
  double er_norm = 0;
  double significance = 0;
  double fused_score = 0;
  std::size_t final_rank = 0;
  ReputationFeatures features;
  std::optional<std::int64_t> dump_reputation;

  bool operator==(const RankedExpert&) const = default;
};

struct RankedExpertList {
  std::string query;
  std::vector<std::string> query_terms;
  std::vector<RankedExpert> entries;  // final order
  FusionConfig config;
  std::string store_hash;
  std::string index_hash;
};

/// Min-max over the candidate set; a constant vector maps to 0.5.
inline std::vector<double> min_max(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(*hi == *lo ? 0.5 : (x - *lo) / (*hi - *lo));
  return out;
}

/// Every user with at least one answer, for community-wide normalization.
inline std::vector<ReputationFeatures> community_features(const CorpusStore& store,
                                                          const ReputationOptions& opt,
                                                          unsigned threads = 1) {
  std::vector<UserId> answerers;
  for (UserId u : store.owners())
    for (PostId id : store.posts_by(u))
      if (store.find_post(id)->is_answer()) {
        answerers.push_back(u);
        break;
      }
  return compute_features(store, answerers, opt, threads);
}

/// Orders fused entries and assigns final ranks.
inline void order_by_fusion(std::vector<RankedExpert>& entries) {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.fused_score != b.fused_score) return a.fused_score > b.fused_score;
    if (a.relevance_score != b.relevance_score) return a.relevance_score > b.relevance_score;
    return a.user_id < b.user_id;
  });
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].final_rank = i + 1;
}

/// The full cascade: phase-1 matching, then ER projection and candidate
/// significance fused as alpha * er_norm + (1 - alpha) * significance.
/// An empty candidate set yields an empty list.
inline RankedExpertList recommend(std::string_view query, const RelevanceIndex& index,
                                  const CorpusStore& store, const ErScores& scores,
                                  const FusionConfig& cfg,
                                  const text::TextPipeline& pipeline = text::TextPipeline(),
                                  const std::vector<ReputationFeatures>* community = nullptr) {
  cfg.validate();
  if (!scores.store_hash.empty() && scores.store_hash != store.hash())
    throw IntegrityError("graph scores were built from store " + scores.store_hash +
                         " but store " + store.hash() + " was supplied");
  if (scores.d != cfg.d)
    throw IntegrityError("graph scores use d=" + format_double(scores.d) +
                         " but the configuration has d=" + format_double(cfg.d));

  const auto match = match_experts(query, index, store, cfg.match_options(), pipeline);
  RankedExpertList out;
  out.query = std::string(query);
  out.query_terms = match.query_terms;
  out.config = cfg;
  out.store_hash = store.hash();
  out.index_hash = index.manifest_hash();
  if (match.candidates.empty()) return out;

  std::vector<UserId> users;
  for (const auto& c : match.candidates) users.push_back(c.user_id);
  const auto er = candidate_er(scores, users);
  const auto features = compute_features(store, users, cfg.reputation_options());

  std::vector<SignificanceScore> sig;
  if (cfg.scope == SignificanceScope::Community) {
    std::vector<ReputationFeatures> local;
    const auto& ref = community ? *community
                                : (local = community_features(store, cfg.reputation_options()));
    sig = significance(features, ref, cfg.weights);
  } else {
    sig = significance(features, cfg.weights);
  }

  std::vector<double> er_raw;
  for (UserId u : users) er_raw.push_back(er.at(u));
  const auto er_norm = min_max(er_raw);

  for (std::size_t i = 0; i < users.size(); ++i) {
    const auto& c = match.candidates[i];
    RankedExpert e;
    e.user_id = c.user_id;
    e.phase1_rank = c.phase1_rank;
    e.relevance_score = c.relevance_score;
    e.test_precision = c.test_precision;
    e.er_score = er_raw[i];
    e.er_norm = er_norm[i];
    e.significance = sig[i].significance;
    e.fused_score = cfg.alpha * e.er_norm + (1.0 - cfg.alpha) * e.significance;
    e.features = features[i];
    if (const auto* u = store.find_user(c.user_id)) e.dump_reputation = u->reputation;
    out.entries.push_back(e);
  }
  order_by_fusion(out.entries);
  return out;
}

/// Per-phase view of one recommended user.
struct Explanation {
  RankedExpert entry;
  std::size_t er_rank = 0;            // among candidates, by raw ER
  std::size_t significance_rank = 0;  // among candidates
  std::size_t candidate_count = 0;
};

inline Explanation explain(const RankedExpertList& list, UserId user) {
  auto it = std::find_if(list.entries.begin(), list.entries.end(),
                         [&](const auto& e) { return e.user_id == user; });
  if (it == list.entries.end())
    throw NotFoundError("user " + std::to_string(user) + " is not in the ranked list");
  Explanation x;
  x.entry = *it;
  x.candidate_count = list.entries.size();
  // rank = 1 + number of candidates strictly better, ties broken by user id
  x.er_rank = x.significance_rank = 1;
  for (const auto& e : list.entries) {
    if (e.user_id == user) continue;
    if (e.er_score > it->er_score || (e.er_score == it->er_score && e.user_id < user))
      ++x.er_rank;
    if (e.significance > it->significance ||
        (e.significance == it->significance && e.user_id < user))
      ++x.significance_rank;
  }
  return x;
}

inline nlohmann::ordered_json to_json(const ReputationFeatures& f) {
  nlohmann::ordered_json j;
  j["answers_count"] = f.answers_count;
  j["accepted_answers"] = f.accepted_answers;
  j["acceptance_ratio"] = f.acceptance_ratio;
  j["avg_score"] = f.avg_score;
  j["avg_views"] = f.avg_views;
  j["avg_favorite"] = f.avg_favorite;
  return j;
}

inline nlohmann::ordered_json to_json(const RankedExpert& e) {
  nlohmann::ordered_json j;
  j["final_rank"] = e.final_rank;
  j["user_id"] = e.user_id;
  j["phase1_rank"] = e.phase1_rank;
  j["relevance_score"] = e.relevance_score;
  j["test_precision"] = e.test_precision;
  j["er_score"] = e.er_score;
  j["er_norm"] = e.er_norm;
  j["significance"] = e.significance;
  j["fused_score"] = e.fused_score;
  j["features"] = to_json(e.features);
  j["dump_reputation"] = e.dump_reputation ? nlohmann::ordered_json(*e.dump_reputation)
                                           : nlohmann::ordered_json(nullptr);
  return j;
}

inline nlohmann::ordered_json to_json(const RankedExpertList& list) {
  nlohmann::ordered_json j;
  j["kind"] = "ranked_expert_list";
  j["store_hash"] = list.store_hash;
  j["index_hash"] = list.index_hash;
  j["config"] = list.config.to_json();
  j["query"] = list.query;
  j["query_terms"] = list.query_terms;
  auto entries = nlohmann::ordered_json::array();
  for (const auto& e : list.entries) entries.push_back(to_json(e));
  j["entries"] = std::move(entries);
  return j;
}

inline nlohmann::ordered_json to_json(const Explanation& x) {
  nlohmann::ordered_json j = to_json(x.entry);
  j["er_rank"] = x.er_rank;
  j["significance_rank"] = x.significance_rank;
  j["candidate_count"] = x.candidate_count;
  return j;
}

/// Fixed-width text table; at most `top` rows (0 = all).
inline std::string format_table(const RankedExpertList& list, std::size_t top = 0) {
  std::string out;
  char line[192];
  std::snprintf(line, sizeof line, "%5s %10s %6s %9s %9s %12s %8s %8s %10s\n", "rank",
                "user", "phase1", "relevance", "test_prec", "er", "signif", "fused",
                "reputation");
  out += line;
  std::size_t shown = 0;
  for (const auto& e : list.entries) {
    if (top && shown++ >= top) break;
    const std::string rep = e.dump_reputation ? std::to_string(*e.dump_reputation) : "-";
    std::snprintf(line, sizeof line, "%5zu %10lld %6zu %9.4f %9.4f %12.6f %8.4f %8.4f %10s\n",
                  e.final_rank, static_cast<long long>(e.user_id), e.phase1_rank,
                  e.relevance_score, e.test_precision, e.er_score, e.significance,
                  e.fused_score, rep.c_str());
    out += line;
  }
  if (list.entries.empty()) out += "(no candidates)\n";
  return out;
}

}  // namespace exrec
