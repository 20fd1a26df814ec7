#pragma once

// Small hand-built communities for cascade tests. Each answerer answers
// questions posted by a private pool of askers, so ER depends only on the
// number of distinct askers.

#include <cstdint>
#include <string>
#include <vector>

#include "exrec/corpus.hpp"

namespace fixture {

struct AnswererSpec {
  exrec::UserId id = 0;
  std::string body;          // text of every answer
  int answers = 5;
  int askers = 1;            // distinct askers served, answers cycle over them
  std::int64_t score = 0;    // score of every answer
  std::int64_t views = 0;    // ViewCount of every answered question
  std::int64_t favorites = 0;
  std::int64_t reputation = 1;
};

inline exrec::CorpusStore build(const std::vector<AnswererSpec>& specs) {
  using namespace exrec;
  std::vector<Post> posts;
  std::vector<CommunityUser> users;
  PostId next_post = 1;
  UserId next_asker = 1000;
  const auto t0 = *Timestamp::parse("2009-03-01T12:00:00");
  for (const auto& s : specs) {
    users.push_back({s.id, "user" + std::to_string(s.id), s.reputation});
    const UserId first_asker = next_asker;
    for (int a = 0; a < s.askers; ++a)
      users.push_back({next_asker++, "asker", 1});
    for (int i = 0; i < s.answers; ++i) {
      Post q;
      q.id = next_post++;
      q.type = PostType::Question;
      q.owner = first_asker + (i % s.askers);
      q.created = Timestamp(t0.millis() + q.id * 60000);
      q.view_count = s.views;
      q.favorite_count = s.favorites;
      q.title = "question";
      q.body = "<p>help needed</p>";
      Post a;
      a.id = next_post++;
      a.type = PostType::Answer;
      a.parent = q.id;
      a.owner = s.id;
      a.created = Timestamp(q.created.millis() + 1000);
      a.score = s.score;
      a.body = "<p>" + s.body + "</p>";
      posts.push_back(q);
      posts.push_back(a);
    }
  }
  return CorpusStore::from_records(std::move(posts), std::move(users));
}

inline const char* kQuery = "kernel scheduler mutex deadlock";

/// Relevance leader R (1) covers every query term but serves one asker with
/// low scores; E (4) covers half the terms yet serves eight askers with top
/// scores, views and favorites. M1 (2) and M2 (3) sit in between on
/// relevance. Phase 1 ranks E fourth; the fused ranking puts E first.
inline std::vector<AnswererSpec> inversion_specs() {
  return {
      {1, "kernel scheduler mutex deadlock", 5, 1, 1, 10, 0, 120},
      {2, "kernel scheduler mutex widget", 5, 1, 5, 100, 2, 800},
      {3, "kernel scheduler mutex gadget", 5, 1, 4, 80, 1, 600},
      {4, "kernel scheduler compiler linker", 8, 8, 30, 1000, 20, 9000},
  };
}

/// One candidate (4) maximal in relevance, ER and every reputation feature.
inline std::vector<AnswererSpec> dominance_specs() {
  auto s = inversion_specs();
  s[3].body = "kernel scheduler mutex deadlock";
  return s;
}

/// ER and reputation disagree: 5 has the most askers but weak answers, 6
/// has a single asker but the best scores and views.
inline std::vector<AnswererSpec> disagreement_specs() {
  return {
      {5, "kernel scheduler mutex deadlock", 6, 6, 2, 20, 0, 300},
      {6, "kernel scheduler mutex deadlock", 6, 1, 40, 2000, 30, 5000},
      {7, "kernel scheduler mutex widget", 6, 2, 8, 300, 5, 700},
  };
}

}  // namespace fixture
