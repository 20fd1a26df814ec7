#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "exrec/error.hpp"
#include "exrec/hash.hpp"
#include "exrec/timestamp.hpp"

namespace exrec {

using PostId = std::int64_t;
using UserId = std::int64_t;

enum class PostType : std::uint8_t { Question = 1, Answer = 2 };

/// One question or answer row of a community dump.
struct Post {
  PostId id = 0;
  PostType type = PostType::Question;
  std::optional<UserId> owner;
  std::optional<PostId> parent;           // answers only
  std::optional<PostId> accepted_answer;  // questions only
  Timestamp created;
  std::int64_t score = 0;
  std::int64_t view_count = 0;      // questions only
  std::int64_t favorite_count = 0;  // questions only
  std::string title;                // questions only
  std::string body;                 // raw HTML

  bool is_question() const noexcept { return type == PostType::Question; }
  bool is_answer() const noexcept { return type == PostType::Answer; }
  bool operator==(const Post&) const = default;
};

struct CommunityUser {
  UserId id = 0;
  std::string display_name;
  std::int64_t reputation = 0;

  bool operator==(const CommunityUser&) const = default;
};

// JSON record layout of the line-delimited store files. Key order is fixed
// so serialized stores are byte-stable.
inline nlohmann::ordered_json to_record(const Post& p) {
  nlohmann::ordered_json j;
  j["id"] = p.id;
  j["type"] = p.is_question() ? "question" : "answer";
  auto opt = [](const std::optional<std::int64_t>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  j["owner"] = opt(p.owner);
  j["parent"] = opt(p.parent);
  j["accepted_answer"] = opt(p.accepted_answer);
  j["created"] = p.created.to_string();
  j["score"] = p.score;
  j["view_count"] = p.view_count;
  j["favorite_count"] = p.favorite_count;
  j["title"] = p.title;
  j["body"] = p.body;
  return j;
}

inline nlohmann::ordered_json to_record(const CommunityUser& u) {
  nlohmann::ordered_json j;
  j["id"] = u.id;
  j["display_name"] = u.display_name;
  j["reputation"] = u.reputation;
  return j;
}

inline Post post_from_record(const nlohmann::json& j) {
  auto opt = [&](const char* key) -> std::optional<std::int64_t> {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<std::int64_t>();
  };
  Post p;
  p.id = j.at("id").get<PostId>();
  const auto type = j.at("type").get<std::string>();
  if (type == "question")
    p.type = PostType::Question;
  else if (type == "answer")
    p.type = PostType::Answer;
  else
    throw IntegrityError("post " + std::to_string(p.id) +
                         ": unknown type '" + type + "'");
  p.owner = opt("owner");
  p.parent = opt("parent");
  p.accepted_answer = opt("accepted_answer");
  auto created = Timestamp::parse(j.at("created").get<std::string>());
  if (!created)
    throw IntegrityError("post " + std::to_string(p.id) + ": bad timestamp");
  p.created = *created;
  p.score = j.at("score").get<std::int64_t>();
  p.view_count = j.at("view_count").get<std::int64_t>();
  p.favorite_count = j.at("favorite_count").get<std::int64_t>();
  p.title = j.at("title").get<std::string>();
  p.body = j.at("body").get<std::string>();
  return p;
}

inline CommunityUser user_from_record(const nlohmann::json& j) {
  return {j.at("id").get<UserId>(), j.at("display_name").get<std::string>(),
          j.at("reputation").get<std::int64_t>()};
}

/// Immutable, indexed collection of posts and users.
///
/// Posts and users are kept sorted by id. An answer whose parent is missing
/// (or is not a question) is an orphan: it stays in the store for text
/// matching but is excluded from graph building.
class CorpusStore {
 public:
  CorpusStore() = default;

  /// Validates and indexes the records. Throws IntegrityError on duplicate
  /// post or user ids and on structurally invalid posts.
  static CorpusStore from_records(std::vector<Post> posts,
                                  std::vector<CommunityUser> users) {
    CorpusStore s;
    std::sort(posts.begin(), posts.end(),
              [](const Post& a, const Post& b) { return a.id < b.id; });
    std::sort(users.begin(), users.end(),
              [](const CommunityUser& a, const CommunityUser& b) {
                return a.id < b.id;
              });
    for (std::size_t i = 1; i < posts.size(); ++i)
      if (posts[i].id == posts[i - 1].id)
        throw IntegrityError("duplicate post id " + std::to_string(posts[i].id));
    for (std::size_t i = 1; i < users.size(); ++i)
      if (users[i].id == users[i - 1].id)
        throw IntegrityError("duplicate user id " + std::to_string(users[i].id));
    for (const auto& p : posts) {
      if (p.is_answer() && !p.parent)
        throw IntegrityError("answer " + std::to_string(p.id) +
                             " has no parent id");
      if (p.is_question() && p.parent)
        throw IntegrityError("question " + std::to_string(p.id) +
                             " has a parent id");
    }
    s.posts_ = std::move(posts);
    s.users_ = std::move(users);
    s.build_indexes();
    return s;
  }

  std::span<const Post> posts() const noexcept { return posts_; }
  std::span<const CommunityUser> users() const noexcept { return users_; }

  const Post* find_post(PostId id) const {
    auto it = post_pos_.find(id);
    return it == post_pos_.end() ? nullptr : &posts_[it->second];
  }

  const CommunityUser* find_user(UserId id) const {
    auto it = std::lower_bound(
        users_.begin(), users_.end(), id,
        [](const CommunityUser& u, UserId v) { return u.id < v; });
    return it != users_.end() && it->id == id ? &*it : nullptr;
  }

  /// Parent question of an answer, or nullptr for orphans and questions.
  const Post* parent_of(const Post& answer) const {
    if (!answer.is_answer() || !answer.parent) return nullptr;
    const Post* q = find_post(*answer.parent);
    return q && q->is_question() ? q : nullptr;
  }

  bool is_orphan(const Post& p) const {
    return p.is_answer() && parent_of(p) == nullptr;
  }

  /// Answer ids of a question, ascending.
  std::span<const PostId> answers_to(PostId question) const {
    auto it = question_index_.find(question);
    if (it == question_index_.end()) return {};
    return it->second;
  }

  /// Post ids owned by a user (questions and answers), ascending.
  std::span<const PostId> posts_by(UserId user) const {
    auto it = by_owner_.find(user);
    if (it == by_owner_.end()) return {};
    return it->second;
  }

  /// Every user id owning at least one post, ascending.
  const std::vector<UserId>& owners() const noexcept { return owners_; }

  bool knows_user(UserId id) const {
    return find_user(id) != nullptr || by_owner_.count(id) != 0;
  }

  std::size_t question_count() const noexcept { return questions_; }
  std::size_t answer_count() const noexcept { return answers_; }
  std::size_t orphan_count() const noexcept { return orphans_; }
  bool empty() const noexcept { return posts_.empty(); }

  /// Canonical line-delimited serializations (one JSON object per line).
  std::string posts_jsonl() const {
    std::string out;
    for (const auto& p : posts_) {
      out += to_record(p).dump();
      out += '\n';
    }
    return out;
  }

  std::string users_jsonl() const {
    std::string out;
    for (const auto& u : users_) {
      out += to_record(u).dump();
      out += '\n';
    }
    return out;
  }

  /// Content hash over both record files; identifies the store in every
  /// downstream manifest.
  const std::string& hash() const noexcept { return hash_; }

 private:
  void build_indexes() {
    post_pos_.reserve(posts_.size());
    for (std::size_t i = 0; i < posts_.size(); ++i)
      post_pos_.emplace(posts_[i].id, i);
    for (const auto& p : posts_) {
      if (p.owner) by_owner_[*p.owner].push_back(p.id);
      if (p.is_question()) {
        ++questions_;
        question_index_[p.id];
      } else {
        ++answers_;
        if (const Post* q = parent_of(p))
          question_index_[q->id].push_back(p.id);
        else
          ++orphans_;
      }
    }
    owners_.reserve(by_owner_.size());
    for (const auto& [uid, ids] : by_owner_) owners_.push_back(uid);
    std::sort(owners_.begin(), owners_.end());
    hash_ = Fnv1a64{}.update(posts_jsonl()).update("\x1e").update(users_jsonl()).hex();
  }

  std::vector<Post> posts_;
  std::vector<CommunityUser> users_;
  std::unordered_map<PostId, std::size_t> post_pos_;
  std::unordered_map<PostId, std::vector<PostId>> question_index_;
  std::unordered_map<UserId, std::vector<PostId>> by_owner_;
  std::vector<UserId> owners_;
  std::size_t questions_ = 0;
  std::size_t answers_ = 0;
  std::size_t orphans_ = 0;
  std::string hash_;
};

/// Posts created within [from, to], inclusive. Answers whose question falls
/// outside the window become orphans of the returned store.
inline CorpusStore date_filter(const CorpusStore& store, Timestamp from,
                               Timestamp to) {
  if (from > to)
    throw ArgumentError("date window start " + from.to_string() +
                        " is after end " + to.to_string());
  std::vector<Post> kept;
  for (const auto& p : store.posts())
    if (from <= p.created && p.created <= to) kept.push_back(p);
  return CorpusStore::from_records(
      std::move(kept),
      std::vector<CommunityUser>(store.users().begin(), store.users().end()));
}

}  // namespace exrec
