#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "exrec/corpus.hpp"
#include "exrec/error.hpp"
#include "exrec/parallel.hpp"
#include "exrec/random.hpp"
#include "exrec/text/pipeline.hpp"

namespace exrec {

struct AnswerDoc {
  PostId post_id = 0;
  text::TokenList tokens;
};

/// A user's expertise as term bags. `answer_docs` are the units of the
/// train/test split; questions contribute to `full_bag` only.
struct ExpertProfile {
  UserId user_id = 0;
  text::BagOfWords full_bag;
  std::vector<AnswerDoc> answer_docs;  // ascending post id

  // Filled by split_profile.
  std::vector<PostId> train_posts;
  std::vector<PostId> test_posts;
  text::BagOfWords train_bag;
  text::BagOfWords test_bag;
};

/// Number of test documents for n answer documents: ceil(fraction * n).
inline std::size_t test_count(std::size_t n, double test_fraction) {
  // The epsilon keeps products like 0.2 * 15 = 3.0000000000000004 at 3.
  const double raw = test_fraction * static_cast<double>(n);
  const auto c = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::min(c, n);
}

/// Seeded shuffle of the answer documents, then ceil(fraction * n) of them
/// become the test set and the rest the training set.
inline ExpertProfile split_profile(ExpertProfile profile, double test_fraction,
                                   std::uint64_t seed) {
  if (profile.answer_docs.empty())
    throw PreconditionError("user " + std::to_string(profile.user_id) +
                            " has no answer documents to split");
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0))
    throw ArgumentError("test fraction must lie in [0, 1]");
  std::vector<std::size_t> order(profile.answer_docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(profile.user_id)));
  shuffle(std::span<std::size_t>(order), rng);

  const std::size_t n_test = test_count(order.size(), test_fraction);
  profile.train_posts.clear();
  profile.test_posts.clear();
  profile.train_bag = {};
  profile.test_bag = {};
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& doc = profile.answer_docs[order[i]];
    const bool test = i < n_test;
    (test ? profile.test_posts : profile.train_posts).push_back(doc.post_id);
    auto& bag = test ? profile.test_bag : profile.train_bag;
    for (const auto& t : doc.tokens) bag.add(t);
  }
  std::sort(profile.train_posts.begin(), profile.train_posts.end());
  std::sort(profile.test_posts.begin(), profile.test_posts.end());
  return profile;
}

/// Cleaned token lists for every post, indexed like store.posts(). Question
/// documents are title followed by body.
inline std::vector<text::TokenList> clean_posts(const CorpusStore& store,
                                                const text::TextPipeline& pipeline,
                                                unsigned threads = 1) {
  const auto posts = store.posts();
  std::vector<text::TokenList> out(posts.size());
  parallel_for(posts.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const Post& p = posts[i];
      auto tokens = pipeline.clean_plain(p.title);
      auto body = pipeline.clean(p.body);
      tokens.insert(tokens.end(), std::make_move_iterator(body.begin()),
                    std::make_move_iterator(body.end()));
      out[i] = std::move(tokens);
    }
  });
  return out;
}

/// One profile per post owner, ascending user id, not yet split.
inline std::vector<ExpertProfile> build_profiles(
    const CorpusStore& store, std::span<const text::TokenList> cleaned) {
  std::map<UserId, ExpertProfile> by_user;
  const auto posts = store.posts();
  for (std::size_t i = 0; i < posts.size(); ++i) {
    const Post& p = posts[i];
    if (!p.owner) continue;
    auto& prof = by_user[*p.owner];
    prof.user_id = *p.owner;
    for (const auto& t : cleaned[i]) prof.full_bag.add(t);
    if (p.is_answer()) prof.answer_docs.push_back({p.id, cleaned[i]});
  }
  std::vector<ExpertProfile> out;
  out.reserve(by_user.size());
  for (auto& [uid, prof] : by_user) out.push_back(std::move(prof));
  return out;
}

}  // namespace exrec
