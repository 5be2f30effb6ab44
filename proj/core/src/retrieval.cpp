#include "cotlab/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cotlab/error.hpp"
#include "cotlab/textops.hpp"
#include "json.hpp"

namespace cotlab::retrieval {

double okapi_idf(std::size_t df, std::size_t corpus_size) {
  const double n = static_cast<double>(corpus_size);
  const double d = static_cast<double>(df);
  return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
}

std::vector<std::string> Bm25Index::query_terms(std::string_view text) {
  auto tokens = textops::tokenize(text);
  for (auto& token : tokens) {
    std::transform(token.begin(), token.end(), token.begin(), [](char c) {
      return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    });
  }
  return tokens;
}

Bm25Index Bm25Index::build(std::vector<Passage> corpus, Bm25Params params) {
  if (corpus.empty()) throw ConfigError("BM25 corpus must not be empty");
  if (!(params.k1 > 0.0)) throw std::invalid_argument("BM25 k1 must be > 0");
  if (!(params.b >= 0.0 && params.b <= 1.0)) throw std::invalid_argument("BM25 b must be in [0,1]");

  Bm25Index index;
  index.params_ = params;
  index.passages_ = std::move(corpus);
  index.doc_len_.reserve(index.passages_.size());

  std::size_t total_len = 0;
  for (std::uint32_t doc = 0; doc < index.passages_.size(); ++doc) {
    auto& passage = index.passages_[doc];
    const auto terms = query_terms(passage.text);
    passage.token_count = terms.size();
    index.doc_len_.push_back(terms.size());
    total_len += terms.size();

    std::unordered_map<std::string, std::uint32_t> tf;
    for (const auto& term : terms) ++tf[term];
    for (auto& [term, freq] : tf) index.postings_[term].emplace_back(doc, freq);
  }
  index.avgdl_ = static_cast<double>(total_len) / static_cast<double>(index.passages_.size());
  return index;
}

std::vector<double> Bm25Index::scores(const std::vector<std::string>& terms) const {
  std::vector<double> out(passages_.size(), 0.0);
  const double k1 = params_.k1;
  const double b = params_.b;
  for (const auto& term : terms) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double idf = okapi_idf(it->second.size(), passages_.size());
    for (const auto& [doc, freq] : it->second) {
      const double tf = static_cast<double>(freq);
      const double norm = static_cast<double>(doc_len_[doc]) / avgdl_;
      out[doc] += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * norm));
    }
  }
  return out;
}

const Passage& Bm25Index::top1(std::string_view query_text) const {
  const auto scored = scores(query_terms(query_text));
  std::size_t best = 0;
  for (std::size_t doc = 1; doc < scored.size(); ++doc) {
    if (scored[doc] > scored[best] ||
        (scored[doc] == scored[best] && passages_[doc].id < passages_[best].id)) {
      best = doc;
    }
  }
  return passages_[best];
}

Passage control_passage(std::string_view question, std::size_t cot_token_count,
                        const Bm25Index& index) {
  const Passage& hit = index.top1(question);
  const auto tokens = textops::tokenize(hit.text);
  const std::size_t keep = std::min(cot_token_count, tokens.size());
  Passage out;
  out.id = hit.id;
  out.text = textops::detokenize(
      textops::TokenSequence(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(keep)));
  out.token_count = keep;
  return out;
}

std::vector<Passage> load_corpus_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open corpus file: " + path);
  std::vector<Passage> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Passage p;
      p.id = j.at("id").get<std::string>();
      p.text = j.at("text").get<std::string>();
      p.token_count = textops::tokenize(p.text).size();
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace cotlab::retrieval
