#pragma once

#include <array>
#include <string>
#include <vector>

#include "cotlab/data.hpp"

namespace cotlab::testing {

// A probability question with ten options, reused across prompt, perturbation
// and scoring tests.
inline data::Example probability_example() {
  data::Example e;
  e.id = "prob-union-001";
  e.dataset = "mmlu_pro";
  e.question =
      "If P(A) = 0.8, P(B) = 0.5, P(A ∪ B) = 0.9, what is P(A ∩ B)?";
  e.options = {{'A', "0.9"}, {'B', "0.1"}, {'C', "1.3"}, {'D', "0.2"}, {'E', "0.3"},
               {'F', "0.7"}, {'G', "0.4"}, {'H', "0.8"}, {'I', "0.6"}, {'J', "0.5"}};
  e.answer_letter = 'G';
  e.answer_value = "0.4";
  return e;
}

// Seven-clause rationale for the question above, semicolon-delimited.
inline const std::array<std::string, 7>& rationale_clauses() {
  static const std::array<std::string, 7> clauses = {
      "P(A∪B)=P(A)+P(B)-P(A∩B);",
      "P(A)=0.8;",
      "P(B)=0.5;",
      "P(A∪B)=0.9;",
      "0.9=0.8+0.5-P(A∩B);",
      "0.9=1.3-P(A∩B);",
      "P(A∩B)=1.3-0.9=0.4;",
  };
  return clauses;
}

inline std::string rationale_compact() {
  std::string out;
  for (const auto& clause : rationale_clauses()) {
    if (!out.empty()) out.push_back(' ');
    out += clause;
  }
  return out;
}

// Same derivation with operators spaced out, as token-level tests need it.
inline std::string rationale_spaced() {
  return "P(A∪B) = P(A) + P(B) - P(A∩B) "
         "P(A) = 0.8 "
         "P(B) = 0.5 "
         "P(A∪B) = 0.9 "
         "0.9 = 0.8 + 0.5 - P(A∩B) "
         "0.9 = 1.3 - P(A∩B) "
         "P(A∩B) = 1.3 - 0.9 = 0.4";
}

// The word-shuffled rendition of the spaced rationale; only the token
// inventory matters.
inline std::vector<std::string> word_shuffled_tokens() {
  return {"-",          "0.5", "0.5",        "0.8",        "P(A∩B)", "-",
          "P(A∩B)", "P(B)", "=",          "=",          "P(A∩B)", "-",
          "0.9",        "P(B)", "=",          "+",          "P(A∩B)", "0.9",
          "1.3",        "P(A∪B)", "0.4", "P(A∪B)", "0.8",        "P(A)",
          "=",          "1.3",  "-",          "+",          "0.9",        "=",
          "=",          "0.9",  "=",          "=",          "P(A)"};
}

}  // namespace cotlab::testing
