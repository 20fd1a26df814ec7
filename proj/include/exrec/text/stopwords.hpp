#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "exrec/error.hpp"
#include "exrec/hash.hpp"
#include "exrec/text/smart_stopwords.hpp"

namespace exrec::text {

/// A fixed stopword list plus the content hash of its canonical text form
/// (one word per line, in the order given, trailing newline).
class StopwordList {
 public:
  explicit StopwordList(std::vector<std::string> words)
      : words_(std::move(words)), set_(words_.begin(), words_.end()) {
    std::string canonical;
    for (const auto& w : words_) {
      canonical += w;
      canonical += '\n';
    }
    hash_ = content_hash(canonical);
  }

  /// The shipped SMART English list (571 words).
  static const StopwordList& smart_english() {
    static const StopwordList list = [] {
      std::vector<std::string> w(detail::kSmartStopwords.begin(),
                                 detail::kSmartStopwords.end());
      return StopwordList(std::move(w));
    }();
    return list;
  }

  /// Reads a plain-text list, one word per line; blank lines are ignored.
  static StopwordList from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stopword list '" + path.string() + "'");
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
        line.pop_back();
      if (!line.empty()) words.push_back(line);
    }
    return StopwordList(std::move(words));
  }

  bool contains(std::string_view w) const {
    return set_.count(std::string(w)) != 0;
  }

  const std::vector<std::string>& words() const noexcept { return words_; }
  std::size_t size() const noexcept { return words_.size(); }
  const std::string& hash() const noexcept { return hash_; }

 private:
  std::vector<std::string> words_;
  std::unordered_set<std::string> set_;
  std::string hash_;
};

}  // namespace exrec::text
