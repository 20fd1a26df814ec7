#pragma once

#include <filesystem>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "exrec/matcher.hpp"
#include "exrec/store_io.hpp"

namespace exrec {

/// Index file layout: the first line is the manifest (JSON object), every
/// following line one body record as produced by RelevanceIndex::body_jsonl.
inline void save_index(const std::filesystem::path& file,
                       const RelevanceIndex& index) {
  if (file.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(file.parent_path(), ec);
  }
  write_text_file(file, index.manifest().dump() + "\n" + index.body_jsonl());
}

inline RelevanceIndex load_index(const std::filesystem::path& file) {
  const std::string text = read_text_file(file);
  const auto nl = text.find('\n');
  if (nl == std::string::npos) throw IntegrityError("index file has no body");
  RelevanceIndex rx;
  nlohmann::ordered_json manifest;
  try {
    manifest = nlohmann::ordered_json::parse(text.substr(0, nl));
    rx.store_hash = manifest.at("store_hash").get<std::string>();
    rx.options.idf =
        idf_variant_from_string(manifest.at("idf_variant").get<std::string>());
    rx.options.test_fraction = manifest.at("test_fraction").get<double>();
    rx.options.seed = manifest.at("seed").get<std::uint64_t>();
    rx.text_manifest = manifest.at("text");
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("index manifest: " + std::string(e.what()));
  }
  if (manifest.value("kind", "") != "relevance_index")
    throw IntegrityError("'" + file.string() + "' is not a relevance index");

  std::vector<std::string> terms;
  std::vector<std::int64_t> df;
  std::vector<TfIdfIndex::Entry> docs;
  detail::for_each_jsonl(text.substr(nl + 1), file.filename().string(),
                         [&](const nlohmann::json& j) {
    if (j.contains("term")) {
      terms.push_back(j.at("term").get<std::string>());
      df.push_back(j.at("df").get<std::int64_t>());
    } else if (j.contains("doc")) {
      TfIdfIndex::Entry e;
      e.key.kind = j.at("doc").get<std::string>() == "answer"
                       ? DocKind::Answer
                       : DocKind::UserTrain;
      e.key.id = j.at("id").get<std::int64_t>();
      for (const auto& tw : j.at("vector"))
        e.vector.entries.emplace_back(tw.at(0).get<TermId>(),
                                      tw.at(1).get<double>());
      docs.push_back(std::move(e));
    } else if (j.contains("answer")) {
      rx.answer_owner.emplace(j.at("answer").get<PostId>(),
                              j.at("owner").get<UserId>());
    } else if (j.contains("profile")) {
      ExpertProfile p;
      p.user_id = j.at("profile").get<UserId>();
      p.train_posts = j.at("train_posts").get<std::vector<PostId>>();
      p.test_posts = j.at("test_posts").get<std::vector<PostId>>();
      for (const auto& [t, n] : j.at("train_bag").items())
        p.train_bag.add(t, n.get<std::int64_t>());
      for (const auto& [t, n] : j.at("test_bag").items())
        p.test_bag.add(t, n.get<std::int64_t>());
      rx.profiles.push_back(std::move(p));
    } else {
      throw IntegrityError("unrecognized index record");
    }
  });
  rx.tfidf = TfIdfIndex::restore(rx.options.idf,
                                 manifest.at("doc_count").get<std::int64_t>(),
                                 std::move(terms), std::move(df),
                                 std::move(docs));
  std::sort(rx.profiles.begin(), rx.profiles.end(),
            [](const auto& a, const auto& b) { return a.user_id < b.user_id; });
  rx.content_digest = content_hash(rx.body_jsonl());
  const auto expected = manifest.value("content_hash", std::string());
  if (rx.content_digest != expected)
    throw IntegrityError("index content hash " + rx.content_digest +
                         " does not match manifest hash " + expected);
  return rx;
}

}  // namespace exrec
