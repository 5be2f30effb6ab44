#include "cotlab/probe.hpp"

#include <cmath>

#include "../support/fixtures.hpp"
#include "cotlab/rng.hpp"
#include "cotlab/textops.hpp"
#include "doctest.h"

using namespace cotlab;
using namespace cotlab::testing;
namespace pb = cotlab::probe;

TEST_CASE("generation prompt matches the frozen template") {
  const auto example = probability_example();
  const auto turns = pb::build_generation_prompt(example);
  REQUIRE(turns.size() == 2);
  CHECK(turns[0].role == pb::Role::System);
  CHECK(turns[1].role == pb::Role::User);
  CHECK(turns[0].content == "You are a helpful assistant that solves problems step by step.");

  // all ten option lines appear in the user turn
  for (const auto& [letter, text] : example.options) {
    const std::string line = std::string(1, letter) + ": " + text;
    CHECK(turns[1].content.find(line) != std::string::npos);
  }

  const std::string golden =
      "If P(A) = 0.8, P(B) = 0.5, P(A ∪ B) = 0.9, what is P(A ∩ B)?\n"
      "A: 0.9\nB: 0.1\nC: 1.3\nD: 0.2\nE: 0.3\nF: 0.7\nG: 0.4\nH: 0.8\nI: 0.6\nJ: 0.5\n"
      "Let's solve this step by step.";
  CHECK(turns[1].content == golden);
}

TEST_CASE("probe prompt uses the followup format and omits empty injections") {
  const auto example = probability_example();

  const auto with = pb::build_probe_prompt(example, std::string("Injected rationale."));
  REQUIRE(with.size() == 4);
  CHECK(with[0].role == pb::Role::System);
  CHECK(with[0].content == "You are a helpful assistant.");
  CHECK(with[1].role == pb::Role::User);
  CHECK(with[2].role == pb::Role::Assistant);
  CHECK(with[2].content == "Injected rationale.");
  CHECK(with[3].role == pb::Role::User);
  CHECK(with[3].content == "What is the answer? Reply with only the letter.");

  const auto io = pb::build_probe_prompt(example, std::nullopt);
  REQUIRE(io.size() == 3);
  CHECK(io[0].role == pb::Role::System);
  CHECK(io[1].role == pb::Role::User);
  CHECK(io[2].role == pb::Role::User);

  const auto empty = pb::build_probe_prompt(example, std::string(""));
  CHECK(empty.size() == 3);  // empty injection is the IO baseline
}

TEST_CASE("io prompts never contain injected text") {
  const auto example = probability_example();
  SplitMix64 rng(4);
  for (int iter = 0; iter < 50; ++iter) {
    std::string injected = "tok" + std::to_string(rng.next());
    const auto turns = pb::build_probe_prompt(example, std::nullopt);
    CHECK(turns.size() == 3);
    for (const auto& turn : turns) {
      CHECK(turn.role != pb::Role::Assistant);
      CHECK(turn.content.find(injected) == std::string::npos);
    }
  }
}

TEST_CASE("score_options softmaxes over found letters with alphabetical ties") {
  const std::vector<char> ab{'A', 'B'};
  const auto tie = pb::score_options({{"A", std::log(0.2)}, {"B", std::log(0.2)}}, ab);
  CHECK(tie.probabilities.at('A') == doctest::Approx(0.5));
  CHECK(tie.probabilities.at('B') == doctest::Approx(0.5));
  CHECK(tie.predicted == 'A');

  const auto renorm = pb::score_options({{"A", std::log(0.6)},
                                         {"B", std::log(0.2)},
                                         {"C", std::log(0.1)},
                                         {"D", std::log(0.1)}},
                                        ab);
  CHECK(renorm.probabilities.at('A') == doctest::Approx(0.75));
  CHECK(renorm.probabilities.at('B') == doctest::Approx(0.25));
  CHECK(renorm.predicted == 'A');

  const auto abstain = pb::score_options({{"x", -0.5}, {"yz", -2.0}}, ab);
  CHECK_FALSE(abstain.predicted.has_value());
  CHECK(abstain.probabilities.at('A') == 0.0);
  CHECK(abstain.probabilities.at('B') == 0.0);
}

TEST_CASE("score_options accepts the documented token spellings") {
  const std::vector<char> letters{'A', 'B', 'C', 'D'};
  const auto scored = pb::score_options(
      {{" B", -0.1}, {"C)", -1.0}, {"D:", -3.0}, {"junk", -0.01}}, letters);
  CHECK(scored.predicted == 'B');
  CHECK(scored.probabilities.at('A') == 0.0);
  CHECK(scored.probabilities.at('B') > scored.probabilities.at('C'));
  CHECK(scored.probabilities.at('D') > 0.0);
}

TEST_CASE("score_options is invariant under logprob shifts") {
  SplitMix64 rng(17);
  const std::vector<char> letters{'A', 'B', 'C', 'D'};
  for (int iter = 0; iter < 100; ++iter) {
    std::map<std::string, double> lps;
    for (const char l : letters) {
      if (rng.below(4) != 0) lps[std::string(1, l)] = -5.0 * rng.unit();
    }
    const double shift = 10.0 * rng.unit() - 5.0;
    std::map<std::string, double> shifted;
    for (const auto& [token, lp] : lps) shifted[token] = lp + shift;

    const auto base = pb::score_options(lps, letters);
    const auto moved = pb::score_options(shifted, letters);
    CHECK(base.predicted == moved.predicted);
    double sum = 0.0;
    for (const char l : letters) {
      CHECK(moved.probabilities.at(l) ==
            doctest::Approx(base.probabilities.at(l)).epsilon(1e-9));
      CHECK(moved.probabilities.at(l) >= 0.0);
      CHECK(moved.probabilities.at(l) <= 1.0);
      sum += moved.probabilities.at(l);
    }
    if (!lps.empty()) CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("extract_final_answer prefers declared answers and normalizes") {
  CHECK(pb::extract_final_answer("... so the answer is 42.") == "42");
  CHECK(pb::extract_final_answer("#### 18") == "18");
  CHECK_FALSE(pb::extract_final_answer("no conclusion").has_value());
  CHECK(pb::extract_final_answer("The answer is 3. Wait, the answer is 7.") == "7");
  CHECK(pb::extract_final_answer("Total comes to 12,500 overall") == "12500");
  CHECK(pb::extract_final_answer("so x = 0.40 at the end") == "0.4");
  CHECK(pb::extract_final_answer("The answer is $1,234.") == "1234");
  CHECK_FALSE(pb::extract_final_answer("").has_value());
}

TEST_CASE("verification prompt and reply parsing") {
  const auto turns = pb::build_verification_prompt("What is 6*7?", "42", "42.0");
  REQUIRE(turns.size() == 2);
  CHECK(turns[0].role == pb::Role::System);
  CHECK(turns[1].content.find("Reference answer: 42\n") != std::string::npos);
  CHECK(turns[1].content.find("Candidate answer: 42.0\n") != std::string::npos);
  CHECK(turns[1].content.find("only yes or no") != std::string::npos);

  CHECK(pb::parse_verification("yes") == true);
  CHECK(pb::parse_verification(" Yes.") == true);
  CHECK(pb::parse_verification("No, they differ") == false);
  CHECK_FALSE(pb::parse_verification("maybe").has_value());
  CHECK_FALSE(pb::parse_verification("").has_value());
}

TEST_CASE("adjacent_bigram_overlap spans its extremes") {
  const std::string reference = "a b c d e f";
  CHECK(pb::adjacent_bigram_overlap(reference, reference) == doctest::Approx(1.0));
  CHECK(pb::adjacent_bigram_overlap(reference, "") == doctest::Approx(0.0));
  CHECK(pb::adjacent_bigram_overlap(reference, "f e d c b a") == doctest::Approx(0.0));
  CHECK(pb::adjacent_bigram_overlap(reference, "c d e f a b") == doctest::Approx(4.0 / 5.0));
  CHECK(pb::adjacent_bigram_overlap("one", "one") == doctest::Approx(0.0));
}

TEST_CASE("mock_probe exposes base rate without injection and peaks at identity") {
  const auto example = probability_example();
  const std::string reference = rationale_spaced();

  const auto io = pb::mock_probe(example, std::nullopt, reference, 0.3, 0.5);
  CHECK(io.option_probabilities.at('G') == doctest::Approx(0.3));
  double others = 0.0;
  for (const auto& [letter, p] : io.option_probabilities) {
    if (letter != 'G') others += p;
  }
  CHECK(others == doctest::Approx(0.7));

  const auto full = pb::mock_probe(example, reference, reference, 0.3, 0.5);
  CHECK(full.option_probabilities.at('G') == doctest::Approx(0.8));
  CHECK(full.predicted == 'G');
  CHECK(full.correct);

  // pure function: bit-identical repeats
  const auto again = pb::mock_probe(example, reference, reference, 0.3, 0.5);
  CHECK(again.option_probabilities == full.option_probabilities);
  CHECK(again.predicted == full.predicted);
}

TEST_CASE("mock_probe on word-shuffled text lands strictly between the extremes") {
  const auto example = probability_example();
  // a 50+ token reference with distinct tokens
  std::string reference;
  for (int i = 0; i < 60; ++i) {
    if (i > 0) reference.push_back(' ');
    reference += "tok" + std::to_string(i);
  }
  const auto tokens = textops::tokenize(reference);
  double mean_overlap = 0.0;
  const int trials = 200;
  for (int seed = 0; seed < trials; ++seed) {
    const auto shuffled = textops::detokenize(
        textops::ngram_block_shuffle(tokens, 1, static_cast<std::uint64_t>(seed)));
    mean_overlap += pb::adjacent_bigram_overlap(reference, shuffled);
  }
  mean_overlap /= trials;
  CHECK(mean_overlap > 0.0);
  CHECK(mean_overlap < 0.5);
}
