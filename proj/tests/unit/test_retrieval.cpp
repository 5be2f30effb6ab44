#include "cotlab/retrieval.hpp"

#include <fstream>

#include "../support/bm25_oracle.hpp"
#include "cotlab/error.hpp"
#include "cotlab/rng.hpp"
#include "cotlab/textops.hpp"
#include "doctest.h"

using namespace cotlab;
namespace rt = cotlab::retrieval;
using cotlab::testing::bm25_oracle::OracleScorer;

namespace {

std::vector<rt::Passage> synthetic_corpus(std::size_t size, std::uint64_t seed) {
  static const char* lexicon[] = {"enzyme",   "orbit",   "tensor", "ledger", "glacier",
                                  "photon",   "sonnet",  "lattice", "magma",  "kernel",
                                  "estuary",  "quorum",  "syntax",  "plasma", "fresco",
                                  "isotope",  "gearbox", "fjord",   "cipher", "mantle"};
  SplitMix64 rng(seed);
  std::vector<rt::Passage> corpus;
  corpus.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    rt::Passage p;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "p%05zu", i);
    p.id = buf;
    const std::size_t words = 5 + rng.below(40);
    for (std::size_t w = 0; w < words; ++w) {
      if (w > 0) p.text.push_back(' ');
      p.text += lexicon[rng.below(std::size(lexicon))];
    }
    corpus.push_back(std::move(p));
  }
  return corpus;
}

std::string random_query(SplitMix64& rng) {
  static const char* lexicon[] = {"enzyme", "orbit",  "tensor", "ledger", "glacier", "photon",
                                  "quorum", "cipher", "magma",  "missingword"};
  std::string q;
  const std::size_t words = 2 + rng.below(6);
  for (std::size_t w = 0; w < words; ++w) {
    if (w > 0) q.push_back(' ');
    q += lexicon[rng.below(std::size(lexicon))];
  }
  return q;
}

}  // namespace

TEST_CASE("build_index validates corpus and parameters") {
  CHECK_THROWS_AS(rt::Bm25Index::build({}, {}), ConfigError);
  auto corpus = synthetic_corpus(3, 1);
  CHECK_THROWS_AS(rt::Bm25Index::build(corpus, {0.0, 0.75}), std::invalid_argument);
  CHECK_THROWS_AS(rt::Bm25Index::build(corpus, {1.2, 1.5}), std::invalid_argument);
}

TEST_CASE("a single-passage corpus answers every query with that passage") {
  std::vector<rt::Passage> corpus{{"only", "the lone passage about glaciers", 0}};
  const auto index = rt::Bm25Index::build(corpus, {});
  CHECK(index.top1("glaciers").id == "only");
  CHECK(index.top1("completely unrelated").id == "only");
}

TEST_CASE("duplicate passages tie and resolve to the smallest id") {
  std::vector<rt::Passage> corpus{
      {"b", "photon lattice photon", 0},
      {"a", "photon lattice photon", 0},
      {"c", "unrelated ledger text", 0},
  };
  const auto index = rt::Bm25Index::build(corpus, {});
  CHECK(index.top1("photon lattice").id == "a");
}

TEST_CASE("index top-1 agrees with the brute-force oracle") {
  const auto corpus = synthetic_corpus(100, 77);
  const auto index = rt::Bm25Index::build(corpus, {});
  const OracleScorer oracle(corpus);
  SplitMix64 rng(99);
  for (int q = 0; q < 50; ++q) {
    const std::string query = random_query(rng);
    CHECK(index.top1(query).id == oracle.top1_id(query));
  }
}

TEST_CASE("rankings are deterministic across rebuilds") {
  const auto corpus = synthetic_corpus(60, 5);
  const auto a = rt::Bm25Index::build(corpus, {});
  const auto b = rt::Bm25Index::build(corpus, {});
  SplitMix64 rng(6);
  for (int q = 0; q < 20; ++q) {
    const std::string query = random_query(rng);
    CHECK(a.scores(rt::Bm25Index::query_terms(query)) ==
          b.scores(rt::Bm25Index::query_terms(query)));
  }
}

TEST_CASE("adding a query-term occurrence never lowers the oracle score") {
  SplitMix64 rng(314);
  for (int iter = 0; iter < 100; ++iter) {
    auto corpus = synthetic_corpus(20, rng.next());
    const std::string term = "orbit";
    const std::size_t doc = rng.below(corpus.size());
    const OracleScorer before(corpus);
    const double s0 = before.score(doc, {term});

    // swap one non-matching word for the term, holding length fixed
    auto tokens = textops::tokenize(corpus[doc].text);
    for (auto& token : tokens) {
      if (token != term) {
        token = term;
        break;
      }
    }
    corpus[doc].text = textops::detokenize(tokens);
    const OracleScorer after(corpus);
    const double s1 = after.score(doc, {term});
    CHECK(s1 >= s0 - 1e-12);
  }
}

TEST_CASE("control_passage truncates the top hit from the start") {
  std::vector<rt::Passage> corpus{
      {"w1", "alpha beta gamma delta epsilon zeta", 0},
      {"w2", "totally different things here", 0},
  };
  const auto index = rt::Bm25Index::build(corpus, {});

  const auto full = rt::control_passage("alpha beta gamma", 100, index);
  CHECK(full.id == "w1");
  CHECK(full.text == "alpha beta gamma delta epsilon zeta");
  CHECK(full.token_count == 6);

  const auto cut = rt::control_passage("alpha beta gamma", 5, index);
  CHECK(cut.text == "alpha beta gamma delta epsilon");
  CHECK(cut.token_count == 5);
  CHECK(textops::tokenize(cut.text).size() == cut.token_count);
}

TEST_CASE("load_corpus_jsonl parses id/text lines and validates") {
  const std::string path = "corpus_test.jsonl";
  {
    std::ofstream out(path);
    out << R"({"id":"x1","text":"alpha beta"})" << "\n";
    out << R"({"id":"x2","text":"gamma"})" << "\n";
  }
  const auto corpus = rt::load_corpus_jsonl(path);
  REQUIRE(corpus.size() == 2);
  CHECK(corpus[0].id == "x1");
  CHECK(corpus[0].token_count == 2);
  {
    std::ofstream out(path);
    out << R"({"id":"x1"})" << "\n";
  }
  CHECK_THROWS_AS(rt::load_corpus_jsonl(path), ConfigError);
  CHECK_THROWS_AS(rt::load_corpus_jsonl("missing_corpus.jsonl"), ConfigError);
  std::remove(path.c_str());
}
