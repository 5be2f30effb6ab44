#include "cotlab/interventions.hpp"

#include <fstream>

#include "../support/fixtures.hpp"
#include "../support/verify.hpp"
#include "cotlab/error.hpp"
#include "cotlab/rng.hpp"
#include "doctest.h"

using namespace cotlab;
using namespace cotlab::testing;
namespace iv = cotlab::interventions;

namespace {

iv::DeclarationPatterns default_patterns() {
  return iv::compile_patterns(iv::default_declaration_sources());
}

}  // namespace

TEST_CASE("strip_answer_declarations removes matched sentences in order") {
  const auto patterns = default_patterns();
  const auto report =
      iv::strip_answer_declarations("0.9-0.5=0.4. Therefore the answer is G.", patterns);
  CHECK(report.cleaned_text == "0.9-0.5=0.4.");
  REQUIRE(report.removed_sentences.size() == 1);
  CHECK(report.removed_sentences[0] == "Therefore the answer is G.");
  CHECK(report.removed_token_fraction == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("strip_answer_declarations leaves declaration-free text unchanged") {
  const auto patterns = default_patterns();
  const std::string text = "First step. Second step. Third step.";
  const auto report = iv::strip_answer_declarations(text, patterns);
  CHECK(report.cleaned_text == text);
  CHECK(report.removed_sentences.empty());
  CHECK(report.removed_token_fraction == 0.0);
  CHECK(iv::strip_answer_declarations("", patterns).removed_token_fraction == 0.0);
}

TEST_CASE("strip_answer_declarations is idempotent and case-insensitive") {
  const auto patterns = default_patterns();
  const std::string text =
      "Compute the difference. THE ANSWER IS 42. So the answer must be C. Final Answer: C.";
  const auto once = iv::strip_answer_declarations(text, patterns);
  const auto twice = iv::strip_answer_declarations(once.cleaned_text, patterns);
  CHECK(once.cleaned_text == twice.cleaned_text);
  CHECK(twice.removed_sentences.empty());
  for (const auto& removed : once.removed_sentences) {
    CHECK(once.cleaned_text.find(removed) == std::string::npos);
  }
}

TEST_CASE("compile_patterns rejects invalid expressions at load time") {
  CHECK_THROWS_AS(iv::compile_patterns({"the answer is", "(["}), ConfigError);
  CHECK_THROWS_AS(iv::compile_patterns({}), ConfigError);
}

TEST_CASE("load_patterns_file reads one expression per line") {
  const std::string path = "declarations_test.txt";
  {
    std::ofstream out(path);
    out << "# cues\nthe answer is\n\nhence the result\n";
  }
  const auto patterns = iv::load_patterns_file(path);
  CHECK(patterns.sources.size() == 2);
  const auto report =
      iv::strip_answer_declarations("Work. Hence the result is 4.", patterns);
  CHECK(report.cleaned_text == "Work.");
  std::remove(path.c_str());
}

TEST_CASE("normalize_numeric canonicalizes equivalent decimals") {
  CHECK(iv::normalize_numeric("0.4") == "0.4");
  CHECK(iv::normalize_numeric("0.40") == "0.4");
  CHECK(iv::normalize_numeric(".4") == "0.4");
  CHECK(iv::normalize_numeric("12.0") == "12");
  CHECK(iv::normalize_numeric("007") == "7");
  CHECK(iv::normalize_numeric("+3") == "3");
  CHECK(iv::normalize_numeric("-0.50") == "-0.5");
  CHECK(iv::normalize_numeric("-0") == "0");
  CHECK(iv::normalize_numeric("") == "");
  CHECK(iv::normalize_numeric("1a") == "");
  CHECK(iv::normalize_numeric("photosynthesis") == "");
}

TEST_CASE("edit_answer_value removes delimiter-bounded matches inside equations") {
  // hand count: the derivation mentions 0.4 exactly once, at its final step
  const std::string text = rationale_compact();
  std::size_t direct = 0;
  for (std::size_t pos = 0; (pos = text.find("0.4", pos)) != std::string::npos; ++pos) ++direct;
  REQUIRE(direct == 1);

  const auto report = iv::edit_answer_value(text, "0.4", std::nullopt);
  CHECK(report.edit_count == 1);
  CHECK(report.edited_text.find("0.4") == std::string::npos);
  // untouched numerals survive
  CHECK(report.edited_text.find("0.8") != std::string::npos);
  CHECK(report.edited_text.find("1.3") != std::string::npos);
}

TEST_CASE("edit_answer_value ignores substring look-alikes") {
  const auto report = iv::edit_answer_value("answer 12", "1", std::nullopt);
  CHECK(report.edit_count == 0);
  CHECK(report.edited_text == "answer 12");
  // 0.4 inside 10.4 or 0.45 is not a match
  CHECK(iv::edit_answer_value("10.4 and 0.45", "0.4", std::nullopt).edit_count == 0);
}

TEST_CASE("edit_answer_value replacement rewrites every match site") {
  const auto report = iv::edit_answer_value("x=0.4; y = 0.40; z=.4", "0.4", std::string("0.2"));
  CHECK(report.edit_count == 3);
  CHECK(report.edited_text == "x=0.2; y = 0.2; z=0.2");
}

TEST_CASE("edit_answer_value matches non-numeric values as whole spans") {
  const auto report =
      iv::edit_answer_value("Photosynthesis drives it; photosynthesis, again.", "photosynthesis",
                            std::nullopt);
  CHECK(report.edit_count == 2);
  const auto residual =
      iv::edit_answer_value(report.edited_text, "photosynthesis", std::nullopt);
  CHECK(residual.edit_count == 0);
}

TEST_CASE("edit_answer_value handles negative targets") {
  CHECK(iv::edit_answer_value("delta = -3 overall", "-3", std::nullopt).edit_count == 1);
  // binary minus is not a sign
  CHECK(iv::edit_answer_value("5-3=2", "-3", std::nullopt).edit_count == 0);
}

TEST_CASE("edit_answer_value leaves no normalized match behind") {
  SplitMix64 rng(11);
  const char* values[] = {"0.4", "12", "7.5", "-2"};
  for (int iter = 0; iter < 100; ++iter) {
    std::string text;
    for (int w = 0; w < 20; ++w) {
      switch (rng.below(5)) {
        case 0: text += "0.4"; break;
        case 1: text += "0.40"; break;
        case 2: text += "x=" + std::to_string(rng.below(20)); break;
        case 3: text += "word"; break;
        default: text += "-2"; break;
      }
      text.push_back(rng.below(4) == 0 ? ';' : ' ');
    }
    for (const char* value : values) {
      const auto report = iv::edit_answer_value(text, value, std::nullopt);
      CHECK(iv::edit_answer_value(report.edited_text, value, std::nullopt).edit_count == 0);
    }
  }
}

TEST_CASE("remove_option_letters touches only explicit option contexts") {
  const std::vector<char> all{'A', 'B', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'J'};
  CHECK(iv::remove_option_letters("so option C holds", all) == "so holds");
  CHECK(iv::remove_option_letters("A cat", all) == "A cat");
  CHECK(iv::remove_option_letters("the answer is (G)", all) == "the answer is");
  CHECK(iv::remove_option_letters("C: 1.3 is listed", all) == "1.3 is listed");
  CHECK(iv::remove_option_letters("pick answer D here", all) == "pick answer here");
  CHECK(iv::remove_option_letters("ABC: a label", all) == "ABC: a label");
  CHECK_THROWS_AS(iv::remove_option_letters("x", {'K'}), std::invalid_argument);
}

TEST_CASE("mask_tokens masks exactly the rounded count at seeded positions") {
  const textops::TokenSequence tokens{"t0", "t1", "t2", "t3", "t4",
                                      "t5", "t6", "t7", "t8", "t9"};
  CHECK(iv::mask_tokens(tokens, 0.0, 3) == tokens);

  const auto all = iv::mask_tokens(tokens, 1.0, 3);
  CHECK(all.size() == tokens.size());
  for (const auto& token : all) CHECK(token == iv::kMaskToken);

  const auto some = iv::mask_tokens(tokens, 0.3, 3);
  std::size_t masked = 0;
  for (std::size_t i = 0; i < some.size(); ++i) {
    if (some[i] == iv::kMaskToken) {
      ++masked;
    } else {
      CHECK(some[i] == tokens[i]);  // unmasked tokens keep identity and position
    }
  }
  CHECK(masked == 3);
  CHECK(iv::mask_tokens(tokens, 0.3, 3) == some);
  CHECK_THROWS_AS(iv::mask_tokens(tokens, 1.5, 3), std::invalid_argument);
}

TEST_CASE("mask_tokens rounding is half away from zero") {
  const textops::TokenSequence tokens{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
  const auto masked = iv::mask_tokens(tokens, 0.25, 9);  // 2.5 -> 3
  std::size_t count = 0;
  for (const auto& t : masked) {
    if (t == iv::kMaskToken) ++count;
  }
  CHECK(count == 3);
}

TEST_CASE("compress_concepts concatenates phrases in order and flags fallbacks") {
  const auto shorten = [](const std::string& sentence) -> std::optional<std::string> {
    if (sentence.find("fail") != std::string::npos) return std::nullopt;
    return "short " + std::to_string(sentence.size());
  };
  CHECK(iv::compress_concepts({}, shorten).text.empty());

  const auto single = iv::compress_concepts({"One sentence."}, shorten);
  CHECK(single.text == "short 13");
  REQUIRE(single.phrases.size() == 1);
  CHECK(single.phrases[0].word_count == 2);
  CHECK_FALSE(single.phrases[0].fallback);

  const auto mixed = iv::compress_concepts({"Alpha.", "fail here.", "Gamma."}, shorten);
  REQUIRE(mixed.phrases.size() == 3);
  CHECK(mixed.phrases[1].fallback);
  CHECK(mixed.phrases[1].text == "fail here.");
  CHECK(mixed.text == "short 6 fail here. short 6");
}

TEST_CASE("render_compression_prompt substitutes the sentence") {
  const auto prompt = iv::render_compression_prompt("P(A)=0.8.");
  CHECK(prompt.find("P(A)=0.8.") != std::string::npos);
  CHECK(prompt.find("{sentence}") == std::string::npos);
}

TEST_CASE("perturb_question_stem never alters options or the gold label") {
  const auto example = probability_example();
  SplitMix64 rng(33);
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t n = 1 + rng.below(8);
    const auto perturbed = iv::perturb_question_stem(example, n, rng.next());
    CHECK(perturbed.options == example.options);
    CHECK(perturbed.answer_letter == example.answer_letter);
    CHECK(perturbed.answer_value == example.answer_value);
    CHECK(multiset_of(textops::tokenize(perturbed.question)) ==
          multiset_of(textops::tokenize(example.question)));
  }
  const auto big_n = iv::perturb_question_stem(example, 500, 9);
  CHECK(big_n.question == example.question);
}
