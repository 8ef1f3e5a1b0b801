#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "rtlopt/errors.hpp"
#include "rtlopt/verilog.hpp"

namespace rtlopt {

// tf = raw term count, idf = ln(N / (1 + df)) + 1, vectors L2-normalized.
// Vocabulary order is lexicographic and all accumulations run in ascending
// vocabulary index, so similarities are reproducible bit-for-bit.
class TfidfIndex {
public:
  struct Entry {
    std::size_t term; // vocabulary index
    double weight;
  };

  static TfidfIndex build(const std::vector<std::vector<std::string>>& documents)
  {
    if (documents.size() < 2)
      throw InsufficientCorpus("tf-idf index needs at least 2 documents, got " +
                               std::to_string(documents.size()));
    TfidfIndex index;
    std::map<std::string, std::size_t> vocab; // ordered: lexicographic term ids
    for (const auto& doc : documents)
      for (const auto& tok : doc) vocab.try_emplace(tok, 0);
    std::size_t next = 0;
    for (auto& [term, id] : vocab) id = next++;
    index.vocabulary_.reserve(vocab.size());
    for (auto& [term, id] : vocab) index.vocabulary_.push_back(term);

    std::vector<std::map<std::size_t, std::size_t>> counts(documents.size());
    std::vector<std::size_t> df(vocab.size(), 0);
    for (std::size_t d = 0; d < documents.size(); ++d) {
      for (const auto& tok : documents[d]) counts[d][vocab.at(tok)] += 1;
      for (const auto& [term, c] : counts[d]) {
        (void)c;
        df[term] += 1;
      }
    }
    const double n_docs = static_cast<double>(documents.size());
    index.idf_.resize(vocab.size());
    for (std::size_t t = 0; t < vocab.size(); ++t)
      index.idf_[t] = std::log(n_docs / (1.0 + static_cast<double>(df[t]))) + 1.0;

    index.vectors_.resize(documents.size());
    for (std::size_t d = 0; d < documents.size(); ++d) {
      auto& vec = index.vectors_[d];
      vec.reserve(counts[d].size());
      double sq = 0.0;
      for (const auto& [term, c] : counts[d]) { // std::map: ascending term order
        double w = static_cast<double>(c) * index.idf_[term];
        vec.push_back({term, w});
        sq += w * w;
      }
      double norm = std::sqrt(sq);
      if (norm > 0.0)
        for (auto& e : vec) e.weight /= norm;
    }
    return index;
  }

  std::size_t size() const { return vectors_.size(); }
  std::size_t vocabulary_size() const { return vocabulary_.size(); }
  double idf(std::size_t term) const { return idf_.at(term); }
  const std::vector<Entry>& vector(std::size_t doc) const { return vectors_.at(doc); }

  // Cosine over L2-normalized vectors; sparse two-pointer merge in ascending
  // term order.
  double similarity(std::size_t a, std::size_t b) const
  {
    const auto& va = vectors_.at(a);
    const auto& vb = vectors_.at(b);
    double dot = 0.0;
    std::size_t i = 0, j = 0;
    while (i < va.size() && j < vb.size()) {
      if (va[i].term < vb[j].term) ++i;
      else if (va[i].term > vb[j].term) ++j;
      else {
        dot += va[i].weight * vb[j].weight;
        ++i;
        ++j;
      }
    }
    return dot;
  }

private:
  std::vector<std::string> vocabulary_;
  std::vector<double> idf_;
  std::vector<std::vector<Entry>> vectors_;
};

// The corpus-similarity tokenizer: Verilog tokens with numeric literals
// bucketed by width class, comments stripped.
inline std::vector<std::string> tokenize_for_similarity(const std::string& source,
                                                        bool bucket_numeric_literals = true)
{
  TokenizerOptions opts;
  opts.bucket_numeric_literals = bucket_numeric_literals;
  return token_texts(tokenize_verilog(source, opts));
}

} // namespace rtlopt
