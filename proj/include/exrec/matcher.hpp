#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "exrec/corpus.hpp"
#include "exrec/error.hpp"
#include "exrec/hash.hpp"
#include "exrec/profile.hpp"
#include "exrec/tfidf.hpp"
#include "exrec/text/pipeline.hpp"

namespace exrec {

struct IndexOptions {
  IdfVariant idf = IdfVariant::Smoothed;
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
  unsigned threads = 1;
};

/// Everything the expert-matching phase needs: the TF-IDF index over answer
/// posts and per-user training bags, plus the split profiles that supply
/// each user's held-out test bag.
struct RelevanceIndex {
  TfIdfIndex tfidf;
  std::vector<ExpertProfile> profiles;  // ascending user id, split
  std::unordered_map<PostId, UserId> answer_owner;
  std::string store_hash;
  IndexOptions options;
  nlohmann::ordered_json text_manifest;
  std::string content_digest;  // hash of body_jsonl()

  const ExpertProfile* profile(UserId user) const {
    auto it = std::lower_bound(
        profiles.begin(), profiles.end(), user,
        [](const ExpertProfile& p, UserId u) { return p.user_id < u; });
    return it != profiles.end() && it->user_id == user ? &*it : nullptr;
  }

  /// Parameters that determine the index contents. Its hash is the index's
  /// identity in downstream manifests.
  nlohmann::ordered_json manifest() const {
    nlohmann::ordered_json m;
    m["schema_version"] = 1;
    m["kind"] = "relevance_index";
    m["store_hash"] = store_hash;
    m["idf_variant"] = to_string(options.idf);
    m["test_fraction"] = options.test_fraction;
    m["seed"] = options.seed;
    m["doc_count"] = tfidf.doc_count();
    m["term_count"] = tfidf.terms().size();
    m["text"] = text_manifest;
    m["content_hash"] = content_digest;
    return m;
  }

  std::string manifest_hash() const { return content_hash(manifest().dump()); }

  /// Line-delimited index body: terms with document frequencies, document
  /// vectors, then per-user split bags. Deterministic for a given store and
  /// options.
  std::string body_jsonl() const {
    std::string out;
    const auto& terms = tfidf.terms();
    const auto& df = tfidf.document_frequencies();
    for (std::size_t t = 0; t < terms.size(); ++t) {
      nlohmann::ordered_json j;
      j["term"] = terms[t];
      j["df"] = df[t];
      out += j.dump();
      out += '\n';
    }
    for (const auto& d : tfidf.documents()) {
      nlohmann::ordered_json j;
      j["doc"] = d.key.kind == DocKind::Answer ? "answer" : "user_train";
      j["id"] = d.key.id;
      auto v = nlohmann::ordered_json::array();
      for (const auto& [t, w] : d.vector.entries) v.push_back({t, w});
      j["vector"] = std::move(v);
      out += j.dump();
      out += '\n';
    }
    std::vector<std::pair<PostId, UserId>> owners(answer_owner.begin(),
                                                  answer_owner.end());
    std::sort(owners.begin(), owners.end());
    for (const auto& [post, user] : owners) {
      nlohmann::ordered_json j;
      j["answer"] = post;
      j["owner"] = user;
      out += j.dump();
      out += '\n';
    }
    auto bag_json = [](const text::BagOfWords& bag) {
      nlohmann::ordered_json b = nlohmann::ordered_json::object();
      for (const auto& [t, n] : bag) b[t] = n;
      return b;
    };
    for (const auto& p : profiles) {
      if (p.train_posts.empty() && p.test_posts.empty()) continue;
      nlohmann::ordered_json j;
      j["profile"] = p.user_id;
      j["train_posts"] = p.train_posts;
      j["test_posts"] = p.test_posts;
      j["train_bag"] = bag_json(p.train_bag);
      j["test_bag"] = bag_json(p.test_bag);
      out += j.dump();
      out += '\n';
    }
    return out;
  }
};

/// Indexes one document per answer post (orphans and owner-less answers
/// included) and one per user training bag.
inline RelevanceIndex build_index(const CorpusStore& store,
                                  const IndexOptions& opts = {},
                                  const text::TextPipeline& pipeline = text::TextPipeline()) {
  if (store.empty()) throw ArgumentError("cannot index an empty store");
  RelevanceIndex rx;
  rx.options = opts;
  rx.store_hash = store.hash();
  rx.text_manifest = pipeline.manifest();

  const auto cleaned = clean_posts(store, pipeline, opts.threads);
  std::vector<IndexedDocument> docs;
  const auto posts = store.posts();
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (!posts[i].is_answer()) continue;
    docs.push_back({{DocKind::Answer, posts[i].id}, text::build_bag(cleaned[i])});
    if (posts[i].owner) rx.answer_owner.emplace(posts[i].id, *posts[i].owner);
  }
  auto profiles = build_profiles(store, cleaned);
  for (auto& p : profiles) {
    if (p.answer_docs.empty()) continue;
    p = split_profile(std::move(p), opts.test_fraction, opts.seed);
    docs.push_back({{DocKind::UserTrain, p.user_id}, p.train_bag});
  }
  rx.profiles = std::move(profiles);
  rx.tfidf = TfIdfIndex::build(docs, opts.idf, opts.threads);
  rx.content_digest = content_hash(rx.body_jsonl());
  return rx;
}

enum class PrecisionMode {
  TermCoverage,  // fraction of distinct query terms present in the test bag
  Cosine,        // cosine between query and test-bag vectors
};

struct MatchOptions {
  std::size_t k_posts = 50;
  std::size_t k_users = 20;
  PrecisionMode precision = PrecisionMode::TermCoverage;
};

struct RelevanceCandidate {
  UserId user_id = 0;
  double relevance_score = 0;
  double test_precision = 0;
  std::size_t phase1_rank = 0;

  bool operator==(const RelevanceCandidate&) const = default;
};

struct MatchResult {
  std::vector<std::string> query_terms;  // distinct stemmed terms, sorted
  std::vector<ScoredDoc> top_posts;
  std::vector<RelevanceCandidate> candidates;
};

/// Fraction of distinct query terms found in `bag`.
inline double term_coverage(const std::vector<std::string>& distinct_terms,
                            const text::BagOfWords& bag) {
  if (distinct_terms.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& t : distinct_terms)
    if (bag.contains(t)) ++hit;
  return static_cast<double>(hit) / static_cast<double>(distinct_terms.size());
}

/// Phase-1 expert matching:
///   1. score the query against every answer-post document, keep the top
///      k_posts with positive similarity;
///   2. collect the distinct owners of those answers;
///   3. score the query against each owner's training bag and keep the top
///      k_users (users with an empty training bag are dropped);
///   4. rank the kept users by held-out test precision.
inline MatchResult match_experts(std::string_view query,
                                 const RelevanceIndex& index,
                                 const CorpusStore& store,
                                 const MatchOptions& opts = {},
                                 const text::TextPipeline& pipeline = text::TextPipeline()) {
  if (store.hash() != index.store_hash)
    throw IntegrityError("index was built from store " + index.store_hash +
                         " but store " + store.hash() + " was supplied");
  const auto tokens = pipeline.clean(query);
  if (tokens.empty()) throw EmptyQueryError();

  MatchResult out;
  const auto qbag = text::build_bag(tokens);
  for (const auto& [t, n] : qbag) out.query_terms.push_back(t);
  const auto qvec = index.tfidf.vectorize(qbag);

  out.top_posts = index.tfidf.top_k(qvec, DocKind::Answer, opts.k_posts);

  std::vector<UserId> owners;
  std::unordered_set<UserId> seen;
  for (const auto& hit : out.top_posts) {
    auto it = index.answer_owner.find(hit.key.id);
    if (it != index.answer_owner.end() && seen.insert(it->second).second)
      owners.push_back(it->second);
  }

  std::vector<RelevanceCandidate> users;
  for (UserId u : owners) {
    const ExpertProfile* prof = index.profile(u);
    if (!prof || prof->train_bag.empty()) continue;
    const SparseVector* train = index.tfidf.find({DocKind::UserTrain, u});
    RelevanceCandidate c;
    c.user_id = u;
    c.relevance_score = train ? cosine(qvec, *train) : 0.0;
    users.push_back(c);
  }
  std::sort(users.begin(), users.end(), [](const auto& a, const auto& b) {
    if (a.relevance_score != b.relevance_score)
      return a.relevance_score > b.relevance_score;
    return a.user_id < b.user_id;
  });
  if (users.size() > opts.k_users) users.resize(opts.k_users);

  for (auto& c : users) {
    const ExpertProfile* prof = index.profile(c.user_id);
    c.test_precision =
        opts.precision == PrecisionMode::TermCoverage
            ? term_coverage(out.query_terms, prof->test_bag)
            : cosine(qvec, index.tfidf.vectorize(prof->test_bag));
  }
  std::sort(users.begin(), users.end(), [](const auto& a, const auto& b) {
    if (a.test_precision != b.test_precision)
      return a.test_precision > b.test_precision;
    if (a.relevance_score != b.relevance_score)
      return a.relevance_score > b.relevance_score;
    return a.user_id < b.user_id;
  });
  for (std::size_t i = 0; i < users.size(); ++i) users[i].phase1_rank = i + 1;
  out.candidates = std::move(users);
  return out;
}

}  // namespace exrec
