#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exrec/corpus.hpp"
#include "exrec/error.hpp"
#include "exrec/xml_rows.hpp"

namespace exrec {

struct IngestSummary {
  std::size_t rows = 0;
  std::size_t questions = 0;
  std::size_t answers = 0;
  std::size_t skipped = 0;
  std::size_t orphans = 0;
  std::size_t users = 0;

  bool operator==(const IngestSummary&) const = default;
};

struct IngestResult {
  CorpusStore store;
  IngestSummary summary;
};

namespace detail {

inline std::optional<std::int64_t> int_attr(const RowAttributes& row,
                                            std::string_view name,
                                            std::int64_t offset) {
  const std::string* v = row.find(name);
  if (!v) return std::nullopt;
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || p != v->data() + v->size())
    throw ParseError("attribute " + std::string(name) + "=\"" + *v +
                         "\" is not an integer",
                     offset);
  return out;
}

inline std::int64_t required_int(const RowAttributes& row, std::string_view name,
                                 std::int64_t offset) {
  auto v = int_attr(row, name, offset);
  if (!v)
    throw ParseError("row is missing attribute " + std::string(name), offset);
  return *v;
}

inline std::optional<std::int64_t> positive_id(const RowAttributes& row,
                                               std::string_view name,
                                               std::int64_t offset) {
  auto v = int_attr(row, name, offset);
  if (v && *v <= 0)
    throw ParseError(std::string(name) + " must be positive", offset);
  return v;
}

inline std::string text_attr(const RowAttributes& row, std::string_view name) {
  const std::string* v = row.find(name);
  return v ? *v : std::string();
}

/// Reads a Posts.xml stream into `posts`; returns the number of rows with an
/// unsupported PostTypeId.
template <typename Feed>
std::size_t read_posts(Feed&& feed, std::vector<Post>& posts,
                       std::size_t& rows) {
  std::size_t skipped = 0;
  XmlRowReader reader("posts", [&](const RowAttributes& row,
                                   std::int64_t offset) {
    const auto type = required_int(row, "PostTypeId", offset);
    const auto id = required_int(row, "Id", offset);
    if (type != 1 && type != 2) {
      ++skipped;
      return;
    }
    if (id <= 0) throw ParseError("Id must be positive", offset);
    Post p;
    p.id = id;
    p.type = type == 1 ? PostType::Question : PostType::Answer;
    p.owner = positive_id(row, "OwnerUserId", offset);
    const std::string* created = row.find("CreationDate");
    if (!created)
      throw ParseError("post " + std::to_string(id) + " has no CreationDate",
                       offset);
    auto ts = Timestamp::parse(*created);
    if (!ts)
      throw ParseError("bad CreationDate \"" + *created + "\"", offset);
    p.created = *ts;
    p.score = int_attr(row, "Score", offset).value_or(0);
    p.body = text_attr(row, "Body");
    if (p.is_answer()) {
      p.parent = positive_id(row, "ParentId", offset);
      if (!p.parent)
        throw ParseError("answer " + std::to_string(id) + " has no ParentId",
                         offset);
    } else {
      p.accepted_answer = positive_id(row, "AcceptedAnswerId", offset);
      p.view_count = int_attr(row, "ViewCount", offset).value_or(0);
      p.favorite_count = int_attr(row, "FavoriteCount", offset).value_or(0);
      if (p.view_count < 0 || p.favorite_count < 0)
        throw ParseError("negative ViewCount/FavoriteCount", offset);
      p.title = text_attr(row, "Title");
    }
    posts.push_back(std::move(p));
  });
  feed(reader);
  rows = reader.row_count();
  return skipped;
}

template <typename Feed>
void read_users(Feed&& feed, std::vector<CommunityUser>& users) {
  XmlRowReader reader("users", [&](const RowAttributes& row,
                                   std::int64_t offset) {
    CommunityUser u;
    u.id = required_int(row, "Id", offset);
    u.display_name = text_attr(row, "DisplayName");
    u.reputation = int_attr(row, "Reputation", offset).value_or(0);
    // The dump contains a "Community" bot with id -1; it owns no posts we
    // keep and is not a candidate expert.
    if (u.id <= 0) return;
    if (u.reputation < 0) throw ParseError("negative Reputation", offset);
    users.push_back(std::move(u));
  });
  feed(reader);
}

inline IngestResult assemble(std::vector<Post> posts,
                             std::vector<CommunityUser> users,
                             std::size_t rows, std::size_t skipped) {
  IngestResult r;
  r.summary.rows = rows;
  r.summary.skipped = skipped;
  r.store = CorpusStore::from_records(std::move(posts), std::move(users));
  r.summary.questions = r.store.question_count();
  r.summary.answers = r.store.answer_count();
  r.summary.orphans = r.store.orphan_count();
  r.summary.users = r.store.users().size();
  return r;
}

}  // namespace detail

/// Stream-parses a Posts.xml (and optionally Users.xml) dump.
///
/// Rows with PostTypeId 1 or 2 become posts; every other type is counted as
/// skipped. Throws IoError, ParseError (with byte offset) or IntegrityError
/// (duplicate ids).
inline IngestResult ingest_dump(const std::string& posts_file,
                                const std::optional<std::string>& users_file =
                                    std::nullopt) {
  std::vector<Post> posts;
  std::vector<CommunityUser> users;
  std::size_t rows = 0;
  const auto skipped = detail::read_posts(
      [&](XmlRowReader& r) { r.read_file(posts_file); }, posts, rows);
  if (users_file)
    detail::read_users([&](XmlRowReader& r) { r.read_file(*users_file); },
                       users);
  return detail::assemble(std::move(posts), std::move(users), rows, skipped);
}

/// In-memory variant of ingest_dump.
inline IngestResult ingest_xml(std::string_view posts_xml,
                               std::string_view users_xml = {}) {
  std::vector<Post> posts;
  std::vector<CommunityUser> users;
  std::size_t rows = 0;
  const auto skipped = detail::read_posts(
      [&](XmlRowReader& r) { r.read_string(posts_xml); }, posts, rows);
  if (!users_xml.empty())
    detail::read_users([&](XmlRowReader& r) { r.read_string(users_xml); },
                       users);
  return detail::assemble(std::move(posts), std::move(users), rows, skipped);
}

namespace detail {

inline void append_xml_escaped(std::string& out, std::string_view s) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      // Literal whitespace in attributes is normalized by XML parsers.
      case '\n': out += "&#xA;"; break;
      case '\r': out += "&#xD;"; break;
      case '\t': out += "&#x9;"; break;
      default: out += c;
    }
  }
}

inline void attr(std::string& out, std::string_view name,
                 std::string_view value) {
  out += ' ';
  out += name;
  out += "=\"";
  append_xml_escaped(out, value);
  out += '"';
}

}  // namespace detail

/// Writes the store's posts back in dump schema. Ingesting the result yields
/// a store byte-identical to `store`.
inline std::string export_posts_xml(const CorpusStore& store) {
  std::string out = "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<posts>\n";
  for (const auto& p : store.posts()) {
    out += "  <row";
    detail::attr(out, "Id", std::to_string(p.id));
    detail::attr(out, "PostTypeId", p.is_question() ? "1" : "2");
    if (p.parent) detail::attr(out, "ParentId", std::to_string(*p.parent));
    if (p.accepted_answer)
      detail::attr(out, "AcceptedAnswerId", std::to_string(*p.accepted_answer));
    detail::attr(out, "CreationDate", p.created.to_string());
    detail::attr(out, "Score", std::to_string(p.score));
    if (p.is_question()) {
      detail::attr(out, "ViewCount", std::to_string(p.view_count));
      detail::attr(out, "FavoriteCount", std::to_string(p.favorite_count));
    }
    if (p.owner) detail::attr(out, "OwnerUserId", std::to_string(*p.owner));
    if (p.is_question()) detail::attr(out, "Title", p.title);
    detail::attr(out, "Body", p.body);
    out += " />\n";
  }
  out += "</posts>\n";
  return out;
}

inline std::string export_users_xml(const CorpusStore& store) {
  std::string out = "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<users>\n";
  for (const auto& u : store.users()) {
    out += "  <row";
    detail::attr(out, "Id", std::to_string(u.id));
    detail::attr(out, "Reputation", std::to_string(u.reputation));
    detail::attr(out, "DisplayName", u.display_name);
    out += " />\n";
  }
  out += "</users>\n";
  return out;
}

}  // namespace exrec
