#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "cotlab/data.hpp"
#include "cotlab/textops.hpp"

namespace cotlab::interventions {

struct StripReport {
  std::string cleaned_text;
  std::vector<std::string> removed_sentences;
  double removed_token_fraction = 0.0;
};

struct ValueEditReport {
  std::string edited_text;
  std::size_t edit_count = 0;
  std::string target_value;
  std::optional<std::string> replacement_value;
};

struct DeclarationPatterns {
  std::vector<std::regex> compiled;  // case-insensitive, searched within sentences
  std::vector<std::string> sources;
};

// Shipped default declaration cues, also available as configs/answer_declarations.txt.
std::vector<std::string> default_declaration_sources();

// Compiles pattern sources; an invalid expression raises ConfigError here,
// never during a run.
DeclarationPatterns compile_patterns(std::vector<std::string> sources);

// Plain text, one case-insensitive regular expression per line; '#' comments
// and blank lines ignored.
DeclarationPatterns load_patterns_file(const std::string& path);

// Removes every sentence matching any pattern; remaining sentences keep their
// order. Idempotent.
StripReport strip_answer_declarations(std::string_view text, const DeclarationPatterns& patterns);

// Canonical form for numeric comparison: "0.40", ".4" and "0.4" all map to
// "0.4". Returns empty when the input is not a plain decimal numeral.
std::string normalize_numeric(std::string_view value);

// Removes (or replaces) every delimiter-bounded occurrence of the value,
// including occurrences embedded in equations. Numeric values match under
// normalization; other values match case-insensitively as whole spans.
ValueEditReport edit_answer_value(std::string_view text, const std::string& value,
                                  const std::optional<std::string>& replacement);

// Removes option-letter mentions in explicit contexts: "(C)", leading "C:",
// "option C" (cue word removed too) and "answer C" (cue word kept). Bare
// capitals elsewhere are never touched. Letters must lie in A..J.
std::string remove_option_letters(std::string_view text, const std::vector<char>& letters);

inline constexpr std::string_view kMaskToken = "____";

// Replaces exactly round(rate * size) seeded-uniform distinct positions with
// the mask token; length and the other tokens are preserved.
textops::TokenSequence mask_tokens(const textops::TokenSequence& tokens, double rate,
                                   std::uint64_t seed);

struct CompressedPhrase {
  std::string text;
  std::size_t word_count = 0;
  bool fallback = false;  // endpoint failed persistently; original sentence kept
};

struct CompressionResult {
  std::string text;  // phrases concatenated in original order
  std::vector<CompressedPhrase> phrases;
};

// compress_one returns the endpoint's phrase for a sentence, or nullopt after
// the client has exhausted its retries.
CompressionResult compress_concepts(
    const textops::SentenceList& sentences,
    const std::function<std::optional<std::string>(const std::string&)>& compress_one);

// Prompt sent per sentence by the concept-compression intervention. The
// "{sentence}" placeholder is substituted verbatim.
inline constexpr std::string_view kConceptCompressionPrompt =
    "Compress the following sentence into a phrase of 5 to 15 words. Keep the core "
    "entities, relations, numbers, and domain-specific terms. Drop connectives, filler, "
    "and grammatical scaffolding. Reply with only the phrase.\n\nSentence: {sentence}";

std::string render_compression_prompt(std::string_view sentence);

// Applies the n-gram block shuffle to the question stem only; options and the
// gold answer are untouched.
data::Example perturb_question_stem(const data::Example& example, std::size_t n,
                                    std::uint64_t seed);

}  // namespace cotlab::interventions
