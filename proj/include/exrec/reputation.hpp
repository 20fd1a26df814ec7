#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "exrec/corpus.hpp"
#include "exrec/error.hpp"
#include "exrec/graph.hpp"
#include "exrec/parallel.hpp"

namespace exrec {

struct ReputationOptions {
  std::int64_t accept_threshold = 15;
  // Also count answers marked accepted by the question owner.
  bool or_accepted_flag = false;
};

struct ReputationFeatures {
  UserId user_id = 0;
  std::int64_t answers_count = 0;
  std::int64_t accepted_answers = 0;
  double acceptance_ratio = 0;
  double avg_score = 0;
  double avg_views = 0;     // parent question ViewCount
  double avg_favorite = 0;  // parent question FavoriteCount

  bool operator==(const ReputationFeatures&) const = default;
};

/// Features entering the significance score, in this order.
inline constexpr std::size_t kFeatureCount = 4;
using FeatureVector = std::array<double, kFeatureCount>;

inline FeatureVector feature_vector(const ReputationFeatures& f) {
  return {f.acceptance_ratio, f.avg_score, f.avg_views, f.avg_favorite};
}

/// Answer-level reputation of one user. Views and favorites come from each
/// answer's parent question; orphaned answers count toward the score
/// features but not toward those two averages.
inline ReputationFeatures compute_features(const CorpusStore& store, UserId user,
                                           const ReputationOptions& opt = {}) {
  if (!store.knows_user(user))
    throw NotFoundError("user " + std::to_string(user) + " is not in the store");
  ReputationFeatures f;
  f.user_id = user;
  std::int64_t score_sum = 0, views = 0, favorites = 0, with_parent = 0;
  for (PostId id : store.posts_by(user)) {
    const Post& p = *store.find_post(id);
    if (!p.is_answer()) continue;
    ++f.answers_count;
    score_sum += p.score;
    const Post* q = store.parent_of(p);
    bool accepted = p.score >= opt.accept_threshold;
    if (opt.or_accepted_flag && q && q->accepted_answer == p.id) accepted = true;
    if (accepted) ++f.accepted_answers;
    if (q) {
      ++with_parent;
      views += q->view_count;
      favorites += q->favorite_count;
    }
  }
  if (f.answers_count > 0) {
    const auto n = static_cast<double>(f.answers_count);
    f.acceptance_ratio = static_cast<double>(f.accepted_answers) / n;
    f.avg_score = static_cast<double>(score_sum) / n;
  }
  if (with_parent > 0) {
    f.avg_views = static_cast<double>(views) / static_cast<double>(with_parent);
    f.avg_favorite = static_cast<double>(favorites) / static_cast<double>(with_parent);
  }
  return f;
}

inline std::vector<ReputationFeatures> compute_features(
    const CorpusStore& store, const std::vector<UserId>& users,
    const ReputationOptions& opt = {}, unsigned threads = 1) {
  std::vector<ReputationFeatures> out(users.size());
  parallel_for(users.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = compute_features(store, users[i], opt);
  });
  return out;
}

struct SignificanceScore {
  UserId user_id = 0;
  double significance = 0;
  FeatureVector normalized{};
};

using FeatureWeights = std::array<double, kFeatureCount>;
inline constexpr FeatureWeights kEqualWeights = {1.0, 1.0, 1.0, 1.0};

/// Min-max normalizes each feature over `reference` (a constant feature maps
/// to 0.5) and scores each entry of `targets` with the weighted mean of its
/// normalized features. Values outside the reference range are clamped.
inline std::vector<SignificanceScore> significance(
    const std::vector<ReputationFeatures>& targets,
    const std::vector<ReputationFeatures>& reference,
    const FeatureWeights& weights = kEqualWeights) {
  if (targets.empty() || reference.empty())
    throw ArgumentError("significance needs a non-empty candidate list");
  double wsum = 0;
  for (double w : weights) {
    if (!(w >= 0)) throw ArgumentError("feature weights must be non-negative");
    wsum += w;
  }
  if (wsum <= 0) throw ArgumentError("feature weights must not all be zero");

  FeatureVector lo, hi;
  lo.fill(0);
  hi.fill(0);
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    lo[k] = hi[k] = feature_vector(reference.front())[k];
    for (const auto& f : reference) {
      const double v = feature_vector(f)[k];
      lo[k] = std::min(lo[k], v);
      hi[k] = std::max(hi[k], v);
    }
  }
  std::vector<SignificanceScore> out;
  out.reserve(targets.size());
  for (const auto& f : targets) {
    SignificanceScore s;
    s.user_id = f.user_id;
    const auto x = feature_vector(f);
    double acc = 0;
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      s.normalized[k] = hi[k] == lo[k]
                            ? 0.5
                            : std::clamp((x[k] - lo[k]) / (hi[k] - lo[k]), 0.0, 1.0);
      acc += weights[k] * s.normalized[k];
    }
    s.significance = acc / wsum;
    out.push_back(s);
  }
  return out;
}

inline std::vector<SignificanceScore> significance(
    const std::vector<ReputationFeatures>& features,
    const FeatureWeights& weights = kEqualWeights) {
  return significance(features, features, weights);
}

inline constexpr std::string_view kReputationCsvHeader =
    "user_id,answers_count,accepted_answers,acceptance_ratio,avg_score,"
    "avg_views,avg_favorite,norm_acceptance,norm_score,norm_views,"
    "norm_favorite,significance";

/// One row per user in input order; `scores` must align with `features`.
inline std::string reputation_csv(const std::vector<ReputationFeatures>& features,
                                  const std::vector<SignificanceScore>& scores) {
  if (features.size() != scores.size())
    throw ArgumentError("features and scores differ in length");
  std::string out(kReputationCsvHeader);
  out += '\n';
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    const auto& s = scores[i];
    out += std::to_string(f.user_id) + ',' + std::to_string(f.answers_count) + ',' +
           std::to_string(f.accepted_answers);
    for (double v : {f.acceptance_ratio, f.avg_score, f.avg_views, f.avg_favorite,
                     s.normalized[0], s.normalized[1], s.normalized[2],
                     s.normalized[3], s.significance})
      out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

}  // namespace exrec
