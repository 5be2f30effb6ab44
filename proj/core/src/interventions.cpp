#include "cotlab/interventions.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cotlab/error.hpp"
#include "cotlab/rng.hpp"

namespace cotlab::interventions {

namespace {

bool ascii_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= '0' && u <= '9') || (u >= 'A' && u <= 'Z') || (u >= 'a' && u <= 'z') || u == '_';
}

char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string collapse_spaces(std::string text) {
  std::string out;
  out.reserve(text.size());
  bool prev_space = false;
  for (const char c : text) {
    const bool space = (c == ' ');
    if (space && prev_space) continue;
    // drop a space that removal left hanging before closing punctuation
    if (!out.empty() && out.back() == ' ' &&
        (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == ')')) {
      out.back() = c;
      prev_space = false;
      continue;
    }
    out.push_back(c);
    prev_space = space;
  }
  std::size_t b = 0;
  std::size_t e = out.size();
  while (b < e && out[b] == ' ') ++b;
  while (e > b && out[e - 1] == ' ') --e;
  return out.substr(b, e - b);
}

}  // namespace

std::vector<std::string> default_declaration_sources() {
  return {
      "the answer is",     "therefore the correct", "the correct option is",
      "final answer",      "the correct answer",    "so the answer",
  };
}

DeclarationPatterns compile_patterns(std::vector<std::string> sources) {
  if (sources.empty()) throw ConfigError("declaration pattern list must not be empty");
  DeclarationPatterns out;
  for (auto& src : sources) {
    try {
      out.compiled.emplace_back(src, std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& ex) {
      throw ConfigError("invalid declaration pattern '" + src + "': " + ex.what());
    }
    out.sources.push_back(std::move(src));
  }
  return out;
}

DeclarationPatterns load_patterns_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open declaration pattern file: " + path);
  std::vector<std::string> sources;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    sources.push_back(line);
  }
  return compile_patterns(std::move(sources));
}

StripReport strip_answer_declarations(std::string_view text,
                                      const DeclarationPatterns& patterns) {
  StripReport report;
  const std::size_t total_tokens = textops::tokenize(text).size();
  const auto sentences = textops::split_sentences(text);
  textops::SentenceList kept;
  std::size_t removed_tokens = 0;
  for (const auto& sentence : sentences) {
    const bool matched = std::any_of(
        patterns.compiled.begin(), patterns.compiled.end(),
        [&](const std::regex& re) { return std::regex_search(sentence, re); });
    if (matched) {
      removed_tokens += textops::tokenize(sentence).size();
      report.removed_sentences.push_back(sentence);
    } else {
      kept.push_back(sentence);
    }
  }
  report.cleaned_text = textops::join_sentences(kept);
  report.removed_token_fraction =
      total_tokens == 0 ? 0.0
                        : static_cast<double>(removed_tokens) / static_cast<double>(total_tokens);
  return report;
}

std::string normalize_numeric(std::string_view value) {
  std::size_t i = 0;
  bool negative = false;
  if (i < value.size() && (value[i] == '+' || value[i] == '-')) {
    negative = value[i] == '-';
    ++i;
  }
  std::string int_part;
  std::string frac_part;
  bool any_digit = false;
  while (i < value.size() && value[i] >= '0' && value[i] <= '9') {
    int_part.push_back(value[i++]);
    any_digit = true;
  }
  if (i < value.size() && value[i] == '.') {
    ++i;
    while (i < value.size() && value[i] >= '0' && value[i] <= '9') {
      frac_part.push_back(value[i++]);
      any_digit = true;
    }
  }
  if (!any_digit || i != value.size()) return {};
  std::size_t lead = 0;
  while (lead < int_part.size() && int_part[lead] == '0') ++lead;
  int_part.erase(0, lead);
  while (!frac_part.empty() && frac_part.back() == '0') frac_part.pop_back();
  if (int_part.empty() && frac_part.empty()) return "0";
  std::string out;
  if (negative) out.push_back('-');
  out += int_part.empty() ? "0" : int_part;
  if (!frac_part.empty()) {
    out.push_back('.');
    out += frac_part;
  }
  return out;
}

namespace {

struct Span {
  std::size_t begin;
  std::size_t end;
};

bool sign_position_ok(std::string_view text, std::size_t sign_pos) {
  if (sign_pos == 0) return true;
  const char prev = text[sign_pos - 1];
  return prev == ' ' || prev == '\t' || prev == '\n' || prev == '=' || prev == '(' ||
         prev == '[' || prev == '{' || prev == ',';
}

// Maximal unsigned decimal literals with delimiter-bounded edges. A '-'
// directly before the literal is folded in only when matching a negative target.
std::vector<Span> numeric_matches(std::string_view text, const std::string& canonical) {
  std::vector<Span> matches;
  const bool want_negative = !canonical.empty() && canonical[0] == '-';
  const auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    std::size_t begin = i;
    bool started = false;
    if (is_digit(c)) {
      started = true;
    } else if (c == '.' && i + 1 < text.size() && is_digit(text[i + 1]) &&
               (i == 0 || !is_digit(text[i - 1]))) {
      started = true;
    }
    if (!started) {
      ++i;
      continue;
    }
    std::size_t j = i;
    if (text[j] == '.') ++j;
    while (j < text.size() && is_digit(text[j])) ++j;
    if (j < text.size() && text[j] == '.' && text[begin] != '.' && j + 1 < text.size() &&
        is_digit(text[j + 1])) {
      ++j;
      while (j < text.size() && is_digit(text[j])) ++j;
    }
    // edge checks: not glued to an identifier or a longer numeral
    const bool left_ok =
        begin == 0 || (!ascii_word_char(text[begin - 1]) && text[begin - 1] != '.');
    const bool right_ok =
        j >= text.size() ||
        (!ascii_word_char(text[j]) &&
         !(text[j] == '.' && j + 1 < text.size() && is_digit(text[j + 1])));
    if (left_ok && right_ok) {
      const std::string span(text.substr(begin, j - begin));
      if (!want_negative) {
        if (normalize_numeric(span) == canonical) matches.push_back({begin, j});
      } else if (begin > 0 && text[begin - 1] == '-' && sign_position_ok(text, begin - 1) &&
                 normalize_numeric("-" + span) == canonical) {
        matches.push_back({begin - 1, j});
      }
    }
    i = j;
  }
  return matches;
}

std::vector<Span> textual_matches(std::string_view text, const std::string& value) {
  std::vector<Span> matches;
  if (value.empty()) return matches;
  std::string lowered(text);
  std::string needle(value);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), ascii_lower);
  std::transform(needle.begin(), needle.end(), needle.begin(), ascii_lower);
  std::size_t pos = 0;
  while ((pos = lowered.find(needle, pos)) != std::string::npos) {
    const std::size_t end = pos + needle.size();
    const bool left_ok = pos == 0 || !ascii_word_char(text[pos - 1]);
    const bool right_ok = end >= text.size() || !ascii_word_char(text[end]);
    if (left_ok && right_ok) {
      matches.push_back({pos, end});
      pos = end;
    } else {
      ++pos;
    }
  }
  return matches;
}

}  // namespace

ValueEditReport edit_answer_value(std::string_view text, const std::string& value,
                                  const std::optional<std::string>& replacement) {
  if (value.empty()) throw std::invalid_argument("edit_answer_value: value must be non-empty");
  ValueEditReport report;
  report.target_value = value;
  report.replacement_value = replacement;

  const std::string canonical = normalize_numeric(value);
  const std::vector<Span> matches =
      canonical.empty() ? textual_matches(text, value) : numeric_matches(text, canonical);
  report.edit_count = matches.size();
  if (matches.empty()) {
    report.edited_text = std::string(text);
    return report;
  }

  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (const auto& span : matches) {
    out.append(text.substr(cursor, span.begin - cursor));
    if (replacement) out.append(*replacement);
    cursor = span.end;
  }
  out.append(text.substr(cursor));
  report.edited_text = replacement ? out : collapse_spaces(std::move(out));
  return report;
}

std::string remove_option_letters(std::string_view text, const std::vector<char>& letters) {
  for (const char l : letters) {
    if (l < 'A' || l > 'J') {
      throw std::invalid_argument("remove_option_letters: letters must lie in A..J");
    }
  }
  std::string out(text);
  for (const char l : letters) {
    const std::string L(1, l);
    const std::regex parens("\\(" + L + "\\)");
    const std::regex prefixed("(^|\\s)" + L + ":");
    const std::regex option_cue("([Oo]ption)\\s+" + L + "(?![A-Za-z0-9])");
    const std::regex answer_cue("([Aa]nswer)\\s+" + L + "(?![A-Za-z0-9])");
    out = std::regex_replace(out, parens, "");
    out = std::regex_replace(out, prefixed, "$1");
    out = std::regex_replace(out, option_cue, "");
    out = std::regex_replace(out, answer_cue, "$1");
  }
  return collapse_spaces(std::move(out));
}

textops::TokenSequence mask_tokens(const textops::TokenSequence& tokens, double rate,
                                   std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw std::invalid_argument("mask_tokens: rate must be in [0,1]");
  }
  const auto k = static_cast<std::size_t>(
      std::llround(rate * static_cast<double>(tokens.size())));
  textops::TokenSequence out = tokens;
  if (k == 0) return out;
  std::vector<std::size_t> positions(tokens.size());
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
  SplitMix64 rng(seed);
  fisher_yates(positions, rng);
  for (std::size_t i = 0; i < k; ++i) out[positions[i]] = std::string(kMaskToken);
  return out;
}

CompressionResult compress_concepts(
    const textops::SentenceList& sentences,
    const std::function<std::optional<std::string>(const std::string&)>& compress_one) {
  CompressionResult result;
  for (const auto& sentence : sentences) {
    CompressedPhrase phrase;
    if (auto compressed = compress_one(sentence); compressed && !compressed->empty()) {
      phrase.text = std::move(*compressed);
    } else {
      phrase.text = sentence;
      phrase.fallback = true;
    }
    phrase.word_count = textops::tokenize(phrase.text).size();
    if (!result.text.empty()) result.text.push_back(' ');
    result.text += phrase.text;
    result.phrases.push_back(std::move(phrase));
  }
  return result;
}

std::string render_compression_prompt(std::string_view sentence) {
  std::string prompt(kConceptCompressionPrompt);
  const std::string placeholder = "{sentence}";
  const std::size_t pos = prompt.find(placeholder);
  prompt.replace(pos, placeholder.size(), sentence);
  return prompt;
}

data::Example perturb_question_stem(const data::Example& example, std::size_t n,
                                    std::uint64_t seed) {
  data::Example out = example;
  const auto tokens = textops::tokenize(example.question);
  out.question = textops::detokenize(textops::ngram_block_shuffle(tokens, n, seed));
  return out;
}

}  // namespace cotlab::interventions
