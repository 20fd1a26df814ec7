#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "exrec/corpus.hpp"
#include "exrec/ingest.hpp"
#include "exrec/random.hpp"
#include "exrec/text/pipeline.hpp"

namespace exrec::synthetic {

/// Shape of a generated community with one planted expert per topic.
struct Options {
  std::size_t topics = 5;
  std::size_t words_per_topic = 20;
  std::size_t general_words = 60;
  std::size_t community_users = 60;   // askers and occasional answerers
  std::size_t questions_per_topic = 30;
  double expert_answer_rate = 0.9;    // chance the planted expert answers
  double other_answer_rate = 0.6;     // chance of one extra casual answer
  std::size_t casual_topic_words = 3; // topic words in a casual answer
  std::uint64_t seed = 1;
};

struct Query {
  std::size_t topic = 0;
  std::string text;
};

struct Community {
  std::string posts_xml;
  std::string users_xml;
  std::vector<std::vector<std::string>> topic_words;
  std::vector<std::string> general_words;
  std::vector<UserId> planted_experts;  // one per topic
  // Share of on-topic answer tokens written by each topic's planted expert.
  std::vector<double> expert_token_share;
};

namespace detail {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix_seed(seed, 0x5e7)) {}
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(bounded(gen_, n));
  }
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::size_t>(hi - lo + 1)));
  }
  bool chance(double p) {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53 < p;
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    exrec::shuffle(std::span<T>(v), gen_);
  }

 private:
  std::mt19937_64 gen_;
};

// Pronounceable pseudo-words whose stems are pairwise distinct and are not
// stopwords, so each word survives cleaning as its own term.
inline std::vector<std::string> make_words(std::size_t n, Rng& rng,
                                           std::set<std::string>& used_stems) {
  static constexpr std::string_view consonants = "bdfgklmnprstvz";
  static constexpr std::string_view vowels = "aeiou";
  const auto& stop = text::StopwordList::smart_english();
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string w;
    const std::size_t syllables = 2 + rng.below(2);
    for (std::size_t s = 0; s < syllables; ++s) {
      w += consonants[rng.below(consonants.size())];
      w += vowels[rng.below(vowels.size())];
    }
    w += consonants[rng.below(consonants.size())];
    if (stop.contains(w)) continue;
    if (!used_stems.insert(text::porter_stem(w)).second) continue;
    out.push_back(w);
  }
  return out;
}

inline std::string join_words(const std::vector<std::string>& words) {
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s += ' ';
    s += w;
  }
  return s;
}

inline std::string date_for(std::size_t i, Rng& rng) {
  // 2009-02-18 .. 2009-06-07 (109 days)
  static const auto start = *Timestamp::parse("2009-02-18T00:00:00");
  const std::int64_t day = static_cast<std::int64_t>(i % 109);
  const std::int64_t ms = day * 86400000LL + rng.range(0, 86399999);
  return Timestamp(start.millis() + ms).to_string();
}

}  // namespace detail

/// Generates a Stack Exchange-style dump (Posts.xml and Users.xml text).
///
/// Users 1..topics are the planted experts: each answers most questions of
/// its topic with text covering the whole topic vocabulary, earns high
/// scores, and never asks. The remaining users ask questions and
/// occasionally post short, mostly off-topic answers.
inline Community generate(const Options& opt) {
  if (opt.topics == 0 || opt.words_per_topic == 0 || opt.community_users < 2)
    throw ArgumentError("synthetic community needs topics, words and >= 2 members");
  detail::Rng rng(opt.seed);
  Community c;
  std::set<std::string> stems;
  for (std::size_t t = 0; t < opt.topics; ++t)
    c.topic_words.push_back(detail::make_words(opt.words_per_topic, rng, stems));
  c.general_words = detail::make_words(opt.general_words, rng, stems);

  const UserId first_member = static_cast<UserId>(opt.topics) + 1;
  const UserId last_member = first_member + static_cast<UserId>(opt.community_users) - 1;
  for (std::size_t t = 0; t < opt.topics; ++t)
    c.planted_experts.push_back(static_cast<UserId>(t) + 1);

  auto pick = [&](const std::vector<std::string>& pool, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(pool[rng.below(pool.size())]);
    return out;
  };
  auto para = [](const std::vector<std::string>& words) {
    return "<p>" + detail::join_words(words) + "</p>";
  };

  std::string posts = "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<posts>\n";
  PostId next_id = 1;
  std::size_t serial = 0;
  std::vector<std::size_t> expert_tokens(opt.topics, 0), topic_tokens(opt.topics, 0);
  for (std::size_t q = 0; q < opt.questions_per_topic; ++q) {
    for (std::size_t t = 0; t < opt.topics; ++t) {
      const auto& vocab = c.topic_words[t];
      Post question;
      question.id = next_id++;
      question.type = PostType::Question;
      question.owner = rng.range(first_member, last_member);
      question.created = *Timestamp::parse(detail::date_for(serial++, rng));
      question.score = rng.range(0, 12);
      question.view_count = rng.range(20, 800);
      question.favorite_count = rng.range(0, 9);
      question.title = detail::join_words(pick(vocab, 3));
      auto qwords = pick(vocab, 8);
      auto gw = pick(c.general_words, 4);
      qwords.insert(qwords.end(), gw.begin(), gw.end());
      rng.shuffle(qwords);
      question.body = para(qwords) + "<pre><code>int main() { return 0; }</code></pre>";

      std::vector<Post> answers;
      if (rng.chance(opt.expert_answer_rate)) {
        Post a;
        a.type = PostType::Answer;
        a.owner = c.planted_experts[t];
        auto words = vocab;  // full topic coverage
        auto extra = pick(vocab, 5);
        words.insert(words.end(), extra.begin(), extra.end());
        auto g = pick(c.general_words, 2);
        words.insert(words.end(), g.begin(), g.end());
        rng.shuffle(words);
        a.body = para(words);
        a.score = rng.range(15, 40);
        expert_tokens[t] += vocab.size() + extra.size();
        topic_tokens[t] += vocab.size() + extra.size();
        answers.push_back(std::move(a));
      }
      if (rng.chance(opt.other_answer_rate)) {
        Post a;
        a.type = PostType::Answer;
        do {
          a.owner = rng.range(first_member, last_member);
        } while (a.owner == question.owner);
        auto words = pick(vocab, opt.casual_topic_words);
        auto g = pick(c.general_words, 8);
        words.insert(words.end(), g.begin(), g.end());
        rng.shuffle(words);
        a.body = para(words);
        a.score = rng.range(-2, 10);
        topic_tokens[t] += opt.casual_topic_words;
        answers.push_back(std::move(a));
      }
      for (auto& a : answers) {
        a.id = next_id++;
        a.parent = question.id;
        a.created = Timestamp(question.created.millis() + rng.range(60000, 86400000));
      }
      std::vector<Post> thread{question};
      thread.insert(thread.end(), answers.begin(), answers.end());
      const auto store = CorpusStore::from_records(thread, {});
      const auto xml = export_posts_xml(store);
      // strip the document wrapper and keep the row lines
      const auto begin = xml.find("  <row");
      const auto end = xml.rfind("</posts>");
      posts += xml.substr(begin, end - begin);
    }
  }
  posts += "</posts>\n";
  c.posts_xml = std::move(posts);

  std::vector<CommunityUser> users;
  for (std::size_t t = 0; t < opt.topics; ++t)
    users.push_back({c.planted_experts[t], "expert " + std::to_string(t + 1),
                     rng.range(5000, 40000)});
  for (UserId u = first_member; u <= last_member; ++u)
    users.push_back({u, "member " + std::to_string(u), rng.range(1, 3000)});
  c.users_xml = export_users_xml(CorpusStore::from_records({}, std::move(users)));

  for (std::size_t t = 0; t < opt.topics; ++t)
    c.expert_token_share.push_back(
        topic_tokens[t] == 0
            ? 0.0
            : static_cast<double>(expert_tokens[t]) /
                  static_cast<double>(topic_tokens[t]));
  return c;
}

/// Natural-language-ish query of `min_terms..max_terms` content words drawn
/// from `vocabulary`, padded with stopwords.
inline std::string make_query(const std::vector<std::string>& vocabulary,
                              std::size_t min_terms, std::size_t max_terms,
                              std::uint64_t seed) {
  detail::Rng rng(seed);
  const std::size_t n = min_terms + rng.below(max_terms - min_terms + 1);
  std::vector<std::string> words;
  auto pool = vocabulary;
  rng.shuffle(pool);
  for (std::size_t i = 0; i < n; ++i) words.push_back(pool[i % pool.size()]);
  static const std::vector<std::string> fillers = {"how", "do", "i", "the",
                                                   "with", "a", "is", "my"};
  words.insert(words.begin(), fillers[rng.below(fillers.size())]);
  words.insert(words.begin() + static_cast<std::ptrdiff_t>(words.size() / 2),
               fillers[rng.below(fillers.size())]);
  return detail::join_words(words);
}

/// One query per topic, each of 10-20 content terms.
inline std::vector<Query> topic_queries(const Community& c, std::uint64_t seed,
                                        std::size_t min_terms = 10,
                                        std::size_t max_terms = 20) {
  std::vector<Query> out;
  for (std::size_t t = 0; t < c.topic_words.size(); ++t)
    out.push_back({t, make_query(c.topic_words[t], min_terms, max_terms,
                                 mix_seed(seed, t))});
  return out;
}

}  // namespace exrec::synthetic
