#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "exrec/error.hpp"
#include "exrec/parallel.hpp"
#include "exrec/text/pipeline.hpp"

namespace exrec {

using TermId = std::uint32_t;

/// Sparse term-weight vector, entries sorted by term id.
struct SparseVector {
  std::vector<std::pair<TermId, double>> entries;

  bool empty() const noexcept { return entries.empty(); }

  double norm() const {
    double s = 0;
    for (const auto& [t, w] : entries) s += w * w;
    return std::sqrt(s);
  }

  bool operator==(const SparseVector&) const = default;
};

inline double dot(const SparseVector& a, const SparseVector& b) {
  double s = 0;
  auto i = a.entries.begin();
  auto j = b.entries.begin();
  while (i != a.entries.end() && j != b.entries.end()) {
    if (i->first < j->first)
      ++i;
    else if (j->first < i->first)
      ++j;
    else {
      s += i->second * j->second;
      ++i;
      ++j;
    }
  }
  return s;
}

/// Cosine similarity; 0 when either side is the zero vector. Weights are
/// non-negative, so the result lies in [0, 1] (clamped against rounding).
inline double cosine(const SparseVector& a, const SparseVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot(a, b) / (na * nb), 0.0, 1.0);
}

enum class IdfVariant {
  Raw,       // ln(N / df)
  Smoothed,  // ln((1 + N) / (1 + df)) + 1
};

inline std::string_view to_string(IdfVariant v) {
  return v == IdfVariant::Raw ? "raw" : "smoothed";
}

inline IdfVariant idf_variant_from_string(std::string_view s) {
  if (s == "raw") return IdfVariant::Raw;
  if (s == "smoothed") return IdfVariant::Smoothed;
  throw ArgumentError("unknown idf variant '" + std::string(s) + "'");
}

enum class DocKind : std::uint8_t { Answer, UserTrain };

struct DocKey {
  DocKind kind = DocKind::Answer;
  std::int64_t id = 0;  // post id or user id

  auto operator<=>(const DocKey&) const = default;
};

struct IndexedDocument {
  DocKey key;
  text::BagOfWords bag;
};

struct ScoredDoc {
  DocKey key;
  double score = 0;
};

/// Vector-space index: raw term counts weighted by idf, each document
/// vector L2-normalized.
class TfIdfIndex {
 public:
  TfIdfIndex() = default;

  static TfIdfIndex build(const std::vector<IndexedDocument>& docs,
                          IdfVariant variant, unsigned threads = 1) {
    if (docs.empty()) throw ArgumentError("cannot index an empty collection");
    TfIdfIndex ix;
    ix.variant_ = variant;

    // Term ids follow lexicographic term order so they do not depend on
    // document order or partitioning.
    std::map<std::string, std::int64_t, std::less<>> df;
    for (const auto& d : docs)
      for (const auto& [term, n] : d.bag) ++df[term];
    ix.terms_.reserve(df.size());
    ix.df_.reserve(df.size());
    for (const auto& [term, n] : df) {
      ix.term_ids_.emplace(term, static_cast<TermId>(ix.terms_.size()));
      ix.terms_.push_back(term);
      ix.df_.push_back(n);
    }
    ix.doc_count_ = static_cast<std::int64_t>(docs.size());
    ix.idf_.resize(ix.df_.size());
    for (std::size_t t = 0; t < ix.df_.size(); ++t)
      ix.idf_[t] = idf_value(variant, ix.doc_count_, ix.df_[t]);

    ix.docs_.resize(docs.size());
    parallel_for(docs.size(), threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i)
        ix.docs_[i] = {docs[i].key, ix.vectorize(docs[i].bag)};
    });
    std::sort(ix.docs_.begin(), ix.docs_.end(),
              [](const auto& a, const auto& b) { return a.key < b.key; });
    for (std::size_t i = 1; i < ix.docs_.size(); ++i)
      if (ix.docs_[i].key == ix.docs_[i - 1].key)
        throw IntegrityError("duplicate document key " +
                             std::to_string(ix.docs_[i].key.id));
    return ix;
  }

  static double idf_value(IdfVariant v, std::int64_t n_docs, std::int64_t df) {
    const double n = static_cast<double>(n_docs);
    const double f = static_cast<double>(df);
    return v == IdfVariant::Raw ? std::log(n / f)
                                : std::log((1.0 + n) / (1.0 + f)) + 1.0;
  }

  /// tf * idf over known terms, L2-normalized; unknown terms are ignored.
  SparseVector vectorize(const text::BagOfWords& bag) const {
    SparseVector v;
    for (const auto& [term, n] : bag) {
      auto it = term_ids_.find(term);
      if (it == term_ids_.end()) continue;
      const double w = static_cast<double>(n) * idf_[it->second];
      if (w != 0.0) v.entries.emplace_back(it->second, w);
    }
    std::sort(v.entries.begin(), v.entries.end());
    const double nrm = v.norm();
    if (nrm > 0)
      for (auto& e : v.entries) e.second /= nrm;
    return v;
  }

  /// Documents of one kind with positive similarity to `query`, ordered by
  /// score descending then id ascending, truncated to k.
  std::vector<ScoredDoc> top_k(const SparseVector& query, DocKind kind,
                               std::size_t k) const {
    std::vector<ScoredDoc> hits;
    for (const auto& d : docs_) {
      if (d.key.kind != kind) continue;
      const double s = cosine(query, d.vector);
      if (s > 0.0) hits.push_back({d.key, s});
    }
    auto better = [](const ScoredDoc& a, const ScoredDoc& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.key.id < b.key.id;
    };
    if (hits.size() > k) {
      std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k),
                        hits.end(), better);
      hits.resize(k);
    } else {
      std::sort(hits.begin(), hits.end(), better);
    }
    return hits;
  }

  const SparseVector* find(DocKey key) const {
    auto it = std::lower_bound(
        docs_.begin(), docs_.end(), key,
        [](const auto& d, const DocKey& k) { return d.key < k; });
    return it != docs_.end() && it->key == key ? &it->vector : nullptr;
  }

  std::optional<TermId> term_id(std::string_view term) const {
    auto it = term_ids_.find(term);
    if (it == term_ids_.end()) return std::nullopt;
    return it->second;
  }

  std::int64_t document_frequency(std::string_view term) const {
    auto id = term_id(term);
    return id ? df_[*id] : 0;
  }

  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::vector<std::int64_t>& document_frequencies() const noexcept {
    return df_;
  }
  std::int64_t doc_count() const noexcept { return doc_count_; }
  IdfVariant variant() const noexcept { return variant_; }

  struct Entry {
    DocKey key;
    SparseVector vector;
  };
  const std::vector<Entry>& documents() const noexcept { return docs_; }

  /// Rebuilds an index from persisted parts (see index_io.hpp).
  static TfIdfIndex restore(IdfVariant variant, std::int64_t doc_count,
                            std::vector<std::string> terms,
                            std::vector<std::int64_t> df,
                            std::vector<Entry> docs) {
    TfIdfIndex ix;
    ix.variant_ = variant;
    ix.doc_count_ = doc_count;
    ix.terms_ = std::move(terms);
    ix.df_ = std::move(df);
    ix.docs_ = std::move(docs);
    if (ix.terms_.size() != ix.df_.size())
      throw IntegrityError("index term and df tables differ in length");
    ix.idf_.resize(ix.df_.size());
    for (std::size_t t = 0; t < ix.terms_.size(); ++t) {
      if (ix.df_[t] < 1 || ix.df_[t] > doc_count)
        throw IntegrityError("document frequency out of range for '" +
                             ix.terms_[t] + "'");
      ix.term_ids_.emplace(ix.terms_[t], static_cast<TermId>(t));
      ix.idf_[t] = idf_value(variant, doc_count, ix.df_[t]);
    }
    std::sort(ix.docs_.begin(), ix.docs_.end(),
              [](const auto& a, const auto& b) { return a.key < b.key; });
    return ix;
  }

 private:
  IdfVariant variant_ = IdfVariant::Smoothed;
  std::int64_t doc_count_ = 0;
  std::vector<std::string> terms_;
  std::map<std::string, TermId, std::less<>> term_ids_;
  std::vector<std::int64_t> df_;
  std::vector<double> idf_;
  std::vector<Entry> docs_;
};

}  // namespace exrec
