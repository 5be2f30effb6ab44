#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cotlab::retrieval {

struct Passage {
  std::string id;
  std::string text;
  std::size_t token_count = 0;  // whitespace tokens of text
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// log((N - df + 0.5) / (df + 0.5) + 1); always positive.
double okapi_idf(std::size_t df, std::size_t corpus_size);

// Okapi BM25 over lowercased whitespace tokens. Immutable after build;
// concurrent queries need no synchronization.
class Bm25Index {
 public:
  // Throws ConfigError for an empty corpus, std::invalid_argument for bad
  // parameters (k1 must be > 0, b in [0,1]).
  static Bm25Index build(std::vector<Passage> corpus, Bm25Params params);

  static std::vector<std::string> query_terms(std::string_view text);

  std::vector<double> scores(const std::vector<std::string>& terms) const;

  // Highest-scoring passage for the query text; ties go to the
  // lexicographically smallest passage id.
  const Passage& top1(std::string_view query_text) const;

  std::size_t size() const { return passages_.size(); }
  std::size_t term_count() const { return postings_.size(); }
  double average_doc_length() const { return avgdl_; }
  const Bm25Params& params() const { return params_; }
  const std::vector<Passage>& passages() const { return passages_; }

 private:
  std::vector<Passage> passages_;
  std::vector<std::size_t> doc_len_;
  double avgdl_ = 0.0;
  // term -> (passage index, term frequency)
  std::unordered_map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> postings_;
  Bm25Params params_;
};

// Top-1 passage for the question, truncated from the start to
// min(cot_token_count, passage length) tokens.
Passage control_passage(std::string_view question, std::size_t cot_token_count,
                        const Bm25Index& index);

// JSONL corpus, one {"id": ..., "text": ...} object per line, UTF-8.
std::vector<Passage> load_corpus_jsonl(const std::string& path);

}  // namespace cotlab::retrieval
