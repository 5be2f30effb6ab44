#include "cotlab/probe.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <stdexcept>
#include <unordered_set>

#include "cotlab/interventions.hpp"
#include "cotlab/textops.hpp"

namespace cotlab::probe {

std::string_view role_name(Role role) {
  switch (role) {
    case Role::System:
      return "system";
    case Role::User:
      return "user";
    case Role::Assistant:
      return "assistant";
  }
  return "user";
}

std::string render_question(const data::Example& e) {
  std::string out = e.question;
  for (const auto& [letter, text] : e.options) {
    out.push_back('\n');
    out.push_back(letter);
    out += ": ";
    out += text;
  }
  return out;
}

std::vector<ChatTurn> build_generation_prompt(const data::Example& e) {
  return {
      {Role::System, std::string(kGenerationSystemPrompt)},
      {Role::User, render_question(e) + "\n" + std::string(kStepByStepCue)},
  };
}

std::vector<ChatTurn> build_probe_prompt(const data::Example& e,
                                         const std::optional<std::string>& injected) {
  std::vector<ChatTurn> turns;
  turns.push_back({Role::System, std::string(kProbeSystemPrompt)});
  turns.push_back({Role::User, render_question(e)});
  if (injected && !injected->empty()) turns.push_back({Role::Assistant, *injected});
  turns.push_back({Role::User, std::string(kAnswerRequest)});
  return turns;
}

ScoredLetters score_options(const std::map<std::string, double>& top_logprobs,
                            const std::vector<char>& valid_letters) {
  if (valid_letters.empty()) throw std::invalid_argument("score_options: no valid letters");
  ScoredLetters out;

  std::map<char, double> found;  // best logprob per letter
  for (const char letter : valid_letters) {
    const std::string spellings[] = {
        std::string(1, letter),
        " " + std::string(1, letter),
        std::string(1, letter) + ")",
        std::string(1, letter) + ":",
    };
    for (const auto& spelling : spellings) {
      const auto it = top_logprobs.find(spelling);
      if (it == top_logprobs.end()) continue;
      const auto cur = found.find(letter);
      if (cur == found.end() || it->second > cur->second) found[letter] = it->second;
    }
  }

  for (const char letter : valid_letters) out.probabilities[letter] = 0.0;
  if (found.empty()) return out;  // abstain

  double max_lp = found.begin()->second;
  for (const auto& [letter, lp] : found) max_lp = std::max(max_lp, lp);
  double mass = 0.0;
  for (const auto& [letter, lp] : found) mass += std::exp(lp - max_lp);
  for (const auto& [letter, lp] : found) {
    out.probabilities[letter] = std::exp(lp - max_lp) / mass;
  }

  // argmax with alphabetical tie-break; map iteration is already ordered
  char best = 0;
  double best_p = -1.0;
  for (const auto& [letter, p] : out.probabilities) {
    if (p > best_p) {
      best = letter;
      best_p = p;
    }
  }
  out.predicted = best;
  return out;
}

namespace {

bool numeral_boundary_ok(std::string_view text, std::size_t begin, std::size_t end) {
  const auto word = [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
  };
  const bool left = begin == 0 || (!word(text[begin - 1]) && text[begin - 1] != '.');
  const bool right = end >= text.size() || !word(text[end]);
  return left && right;
}

std::string clean_numeral(std::string raw) {
  std::string cleaned;
  for (const char c : raw) {
    if (c == '$' || c == ',' || c == '%') continue;
    cleaned.push_back(c);
  }
  while (!cleaned.empty() && cleaned.back() == '.') cleaned.pop_back();
  return interventions::normalize_numeric(cleaned);
}

}  // namespace

std::optional<std::string> extract_final_answer(std::string_view generated) {
  static const std::regex declared(
      R"((?:answer\s+is|####)\s*:?\s*\**\s*(\$?[-+]?[\d][\d,]*(?:\.\d+)?%?))",
      std::regex::ECMAScript | std::regex::icase);

  const std::string text(generated);
  std::optional<std::string> best;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), declared);
       it != std::sregex_iterator(); ++it) {
    const auto normalized = clean_numeral((*it)[1].str());
    if (!normalized.empty()) best = normalized;
  }
  if (best) return best;

  // fall back to the last standalone numeral
  static const std::regex numeral(R"(\$?[-+]?\d[\d,]*(?:\.\d+)?%?)");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), numeral);
       it != std::sregex_iterator(); ++it) {
    const auto begin = static_cast<std::size_t>(it->position());
    const auto end = begin + static_cast<std::size_t>(it->length());
    if (!numeral_boundary_ok(text, begin, end)) continue;
    const auto normalized = clean_numeral(it->str());
    if (!normalized.empty()) best = normalized;
  }
  return best;
}

std::vector<ChatTurn> build_verification_prompt(std::string_view question,
                                                std::string_view reference_answer,
                                                std::string_view candidate_answer) {
  std::string request = "Question: ";
  request += question;
  request += "\nReference answer: ";
  request += reference_answer;
  request += "\nCandidate answer: ";
  request += candidate_answer;
  request += "\nDoes the candidate answer agree with the reference answer? "
             "Reply with only yes or no.";
  return {
      {Role::System, std::string(kProbeSystemPrompt)},
      {Role::User, std::move(request)},
  };
}

std::optional<bool> parse_verification(std::string_view reply) {
  std::string word;
  for (const char c : reply) {
    if (word.empty() && (c == ' ' || c == '\n' || c == '\t')) continue;
    if (c == ' ' || c == '\n' || c == '\t' || c == '.' || c == ',' || c == '!') break;
    word.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  if (word == "yes") return true;
  if (word == "no") return false;
  return std::nullopt;
}

double adjacent_bigram_overlap(std::string_view reference, std::string_view candidate) {
  const auto ref_tokens = textops::tokenize(reference);
  if (ref_tokens.size() < 2) return 0.0;
  const auto cand_tokens = textops::tokenize(candidate);

  std::unordered_set<std::string> cand_bigrams;
  for (std::size_t i = 0; i + 1 < cand_tokens.size(); ++i) {
    cand_bigrams.insert(cand_tokens[i] + "\x1f" + cand_tokens[i + 1]);
  }
  std::size_t present = 0;
  for (std::size_t i = 0; i + 1 < ref_tokens.size(); ++i) {
    if (cand_bigrams.count(ref_tokens[i] + "\x1f" + ref_tokens[i + 1])) ++present;
  }
  return static_cast<double>(present) / static_cast<double>(ref_tokens.size() - 1);
}

ProbeOutcome mock_probe(const data::Example& e, const std::optional<std::string>& injected,
                        std::string_view reference_rationale, double base_rate, double gain) {
  if (!(base_rate >= 0.0 && base_rate <= 1.0)) {
    throw std::invalid_argument("mock_probe: base_rate must be in [0,1]");
  }
  if (!(gain >= 0.0)) throw std::invalid_argument("mock_probe: gain must be >= 0");

  const double overlap =
      (injected && !injected->empty()) ? adjacent_bigram_overlap(reference_rationale, *injected)
                                       : 0.0;
  const double raw = base_rate + gain * overlap;
  const double correct_score = std::clamp(raw, 0.0, 1.0);

  ProbeOutcome outcome;
  const auto letters = e.letters();
  const double others = letters.size() > 1
                            ? (1.0 - correct_score) / static_cast<double>(letters.size() - 1)
                            : 0.0;
  for (const char letter : letters) {
    const double p = letter == e.answer_letter ? correct_score : others;
    outcome.option_probabilities[letter] = p;
    outcome.raw_top_logprobs[std::string(1, letter)] = p > 0.0 ? std::log(p) : -1e9;
  }
  char best = 0;
  double best_p = -1.0;
  for (const auto& [letter, p] : outcome.option_probabilities) {
    if (p > best_p) {
      best = letter;
      best_p = p;
    }
  }
  outcome.predicted = best;
  outcome.correct = best == e.answer_letter;
  return outcome;
}

}  // namespace cotlab::probe
