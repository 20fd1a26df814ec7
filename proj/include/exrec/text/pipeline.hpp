#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "exrec/text/html.hpp"
#include "exrec/text/porter.hpp"
#include "exrec/text/stopwords.hpp"

namespace exrec::text {

using TokenList = std::vector<std::string>;

/// Term multiset. Iteration is in term order, which keeps every derived
/// artifact byte-stable.
class BagOfWords {
 public:
  using Map = std::map<std::string, std::int64_t, std::less<>>;

  BagOfWords() = default;

  void add(std::string_view term, std::int64_t n = 1) {
    if (n <= 0) return;
    auto it = counts_.find(term);
    if (it == counts_.end())
      counts_.emplace(std::string(term), n);
    else
      it->second += n;
    total_ += n;
  }

  void merge(const BagOfWords& other) {
    for (const auto& [t, n] : other.counts_) add(t, n);
  }

  std::int64_t count(std::string_view term) const {
    auto it = counts_.find(term);
    return it == counts_.end() ? 0 : it->second;
  }

  bool contains(std::string_view term) const { return count(term) > 0; }
  std::size_t distinct() const noexcept { return counts_.size(); }
  std::int64_t total() const noexcept { return total_; }
  bool empty() const noexcept { return counts_.empty(); }

  Map::const_iterator begin() const { return counts_.begin(); }
  Map::const_iterator end() const { return counts_.end(); }

  bool operator==(const BagOfWords& o) const { return counts_ == o.counts_; }

 private:
  Map counts_;
  std::int64_t total_ = 0;
};

inline BagOfWords build_bag(const TokenList& tokens) {
  BagOfWords bag;
  for (const auto& t : tokens) bag.add(t);
  return bag;
}

/// HTML post text to stemmed tokens:
///   1. drop <code> and <pre> elements with their contents
///   2. drop remaining tags, decode entities
///   3. lowercase, split on non-alphanumerics, drop short tokens, pure
///      numbers and stopwords
///   4. Porter-stem
class TextPipeline {
 public:
  explicit TextPipeline(const StopwordList& stopwords =
                            StopwordList::smart_english(),
                        std::size_t min_token_length = 2)
      : stopwords_(&stopwords), min_len_(min_token_length) {}

  /// Steps 1-3; tokens are lowercase but not stemmed.
  TokenList normalize(std::string_view html) const {
    return tokenize(decode_entities(strip_tags(strip_code_blocks(html))));
  }

  /// Step 3 only, for plain-text fields such as titles.
  TokenList tokenize(std::string_view plain) const {
    TokenList out;
    std::string cur;
    bool all_digits = true;
    auto flush = [&] {
      if (cur.size() >= min_len_ && !all_digits && !stopwords_->contains(cur))
        out.push_back(cur);
      cur.clear();
      all_digits = true;
    };
    for (char ch : plain) {
      const auto c = static_cast<unsigned char>(ch);
      if (c < 0x80 && std::isalnum(c)) {
        cur += static_cast<char>(std::tolower(c));
        if (!std::isdigit(c)) all_digits = false;
      } else if (!cur.empty()) {
        flush();
      }
    }
    if (!cur.empty()) flush();
    return out;
  }

  TokenList stem(TokenList tokens) const {
    for (auto& t : tokens) t = stemmer_(t);
    return tokens;
  }

  /// All four steps.
  TokenList clean(std::string_view html) const { return stem(normalize(html)); }

  /// Tokenize and stem a plain-text field (no markup handling).
  TokenList clean_plain(std::string_view plain) const {
    return stem(tokenize(plain));
  }

  const StopwordList& stopwords() const noexcept { return *stopwords_; }

  /// Parameters recorded in index manifests.
  nlohmann::ordered_json manifest() const {
    nlohmann::ordered_json j;
    j["steps"] = {"strip_code_pre", "strip_tags_decode_entities",
                  "lowercase_split_stopwords", "porter_stem"};
    j["min_token_length"] = min_len_;
    j["drop_numeric_tokens"] = true;
    j["stopword_count"] = stopwords_->size();
    j["stopword_hash"] = stopwords_->hash();
    j["stemmer"] = "porter";
    return j;
  }

 private:
  const StopwordList* stopwords_;
  std::size_t min_len_;
  PorterStemmer stemmer_;
};

inline TokenList clean_text(std::string_view html) {
  static const TextPipeline pipeline;
  return pipeline.clean(html);
}

}  // namespace exrec::text
