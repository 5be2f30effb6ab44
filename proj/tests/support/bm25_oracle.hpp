#pragma once

#include <cctype>
#include <cmath>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "cotlab/retrieval.hpp"

// Brute-force Okapi BM25 oracle, independent of the index implementation: its
// own tokenizer, no postings, and every document scored directly from the
// formula on each query.
namespace cotlab::testing::bm25_oracle {

inline std::vector<std::string> terms_of(const std::string& text) {
  std::istringstream stream(text);
  std::vector<std::string> out;
  std::string word;
  while (stream >> word) {
    for (auto& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out.push_back(word);
  }
  return out;
}

struct OracleScorer {
  std::vector<std::string> ids;
  std::vector<std::unordered_map<std::string, std::size_t>> term_freqs;
  std::vector<double> doc_len;
  std::unordered_map<std::string, std::size_t> doc_freq;
  double avgdl = 0.0;
  double k1 = 1.2;
  double b = 0.75;

  explicit OracleScorer(const std::vector<retrieval::Passage>& corpus, double k1_ = 1.2,
                        double b_ = 0.75)
      : k1(k1_), b(b_) {
    for (const auto& passage : corpus) {
      ids.push_back(passage.id);
      const auto terms = terms_of(passage.text);
      doc_len.push_back(static_cast<double>(terms.size()));
      avgdl += static_cast<double>(terms.size());
      std::unordered_map<std::string, std::size_t> tf;
      for (const auto& t : terms) ++tf[t];
      for (const auto& [term, _] : tf) ++doc_freq[term];
      term_freqs.push_back(std::move(tf));
    }
    avgdl /= static_cast<double>(corpus.size());
  }

  double score(std::size_t doc, const std::vector<std::string>& query_terms) const {
    double total = 0.0;
    const double n_docs = static_cast<double>(ids.size());
    for (const auto& q : query_terms) {
      const auto df_it = doc_freq.find(q);
      if (df_it == doc_freq.end()) continue;
      const auto tf_it = term_freqs[doc].find(q);
      if (tf_it == term_freqs[doc].end()) continue;
      const double df = static_cast<double>(df_it->second);
      const double tf = static_cast<double>(tf_it->second);
      const double idf = std::log((n_docs - df + 0.5) / (df + 0.5) + 1.0);
      total += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * doc_len[doc] / avgdl));
    }
    return total;
  }

  // Top passage id over a full scan; ties broken by smallest id.
  std::string top1_id(const std::string& query) const {
    const auto query_terms = terms_of(query);
    std::size_t best = 0;
    double best_score = score(0, query_terms);
    for (std::size_t doc = 1; doc < ids.size(); ++doc) {
      const double s = score(doc, query_terms);
      if (s > best_score || (s == best_score && ids[doc] < ids[best])) {
        best = doc;
        best_score = s;
      }
    }
    return ids[best];
  }
};

}  // namespace cotlab::testing::bm25_oracle
