#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "exrec/corpus.hpp"
#include "exrec/error.hpp"
#include "exrec/ingest.hpp"

namespace exrec {

inline constexpr int kStoreSchemaVersion = 1;

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return ss.str();
}

inline nlohmann::ordered_json summary_json(const IngestSummary& s) {
  nlohmann::ordered_json j;
  j["rows"] = s.rows;
  j["questions"] = s.questions;
  j["answers"] = s.answers;
  j["skipped"] = s.skipped;
  j["orphans"] = s.orphans;
  j["users"] = s.users;
  return j;
}

/// Store directory layout:
///   manifest.json  schema version, store hash, counts, ingest parameters
///   posts.jsonl    one post record per line, ascending id
///   users.jsonl    one user record per line, ascending id
inline void save_store(const std::filesystem::path& dir,
                       const CorpusStore& store, const IngestSummary& summary,
                       const nlohmann::ordered_json& ingest_params = {}) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  const std::string posts = store.posts_jsonl();
  const std::string users = store.users_jsonl();
  nlohmann::ordered_json m;
  m["schema_version"] = kStoreSchemaVersion;
  m["kind"] = "corpus_store";
  m["store_hash"] = store.hash();
  m["posts_file"] = "posts.jsonl";
  m["users_file"] = "users.jsonl";
  m["summary"] = summary_json(summary);
  m["ingest"] = ingest_params.is_null() ? nlohmann::ordered_json::object()
                                        : ingest_params;
  write_text_file(dir / "posts.jsonl", posts);
  write_text_file(dir / "users.jsonl", users);
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

namespace detail {

template <typename F>
void for_each_jsonl(const std::string& text, const std::string& name, F&& f) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      f(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw IntegrityError(name + ":" + std::to_string(lineno) + ": " +
                           e.what());
    }
  }
}

}  // namespace detail

/// Loads a store written by save_store and verifies its content hash.
inline CorpusStore load_store(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("store manifest: " + std::string(e.what()));
  }
  if (manifest.value("schema_version", 0) != kStoreSchemaVersion)
    throw IntegrityError("unsupported store schema version");
  std::vector<Post> posts;
  std::vector<CommunityUser> users;
  detail::for_each_jsonl(read_text_file(dir / "posts.jsonl"), "posts.jsonl",
                         [&](const nlohmann::json& j) {
                           posts.push_back(post_from_record(j));
                         });
  detail::for_each_jsonl(read_text_file(dir / "users.jsonl"), "users.jsonl",
                         [&](const nlohmann::json& j) {
                           users.push_back(user_from_record(j));
                         });
  auto store = CorpusStore::from_records(std::move(posts), std::move(users));
  const auto expected = manifest.value("store_hash", std::string());
  if (store.hash() != expected)
    throw IntegrityError("store content hash " + store.hash() +
                         " does not match manifest hash " + expected);
  return store;
}

}  // namespace exrec
