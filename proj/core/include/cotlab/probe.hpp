#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cotlab/data.hpp"
#include "cotlab/endpoint.hpp"

namespace cotlab::probe {

enum class Role { System, User, Assistant };

std::string_view role_name(Role role);

struct ChatTurn {
  Role role;
  std::string content;
};

// Question stem followed by one "L: text" line per option.
std::string render_question(const data::Example& e);

// [system, user]; the user turn ends with the step-by-step cue line.
std::vector<ChatTurn> build_generation_prompt(const data::Example& e);

// Followup format: [system, user(question), assistant(injected), user(answer
// request)]. An absent or empty injection omits the assistant turn (the
// input-only baseline).
std::vector<ChatTurn> build_probe_prompt(const data::Example& e,
                                         const std::optional<std::string>& injected);

inline constexpr std::string_view kGenerationSystemPrompt =
    "You are a helpful assistant that solves problems step by step.";
inline constexpr std::string_view kProbeSystemPrompt = "You are a helpful assistant.";
inline constexpr std::string_view kStepByStepCue = "Let's solve this step by step.";
inline constexpr std::string_view kAnswerRequest =
    "What is the answer? Reply with only the letter.";

struct ScoredLetters {
  std::map<char, double> probabilities;  // every valid letter; zeros where unseen
  std::optional<char> predicted;         // nullopt = abstain
};

// Softmax over the valid option letters found in the top-logprob map. Each
// letter takes the best logprob among the accepted token spellings: "L",
// " L", "L)" and "L:". Ties break alphabetically; no letter found means
// abstain.
ScoredLetters score_options(const std::map<std::string, double>& top_logprobs,
                            const std::vector<char>& valid_letters);

// Last match among "answer is X" and "#### X"; falls back to the final
// standalone number. Returns the canonical numeric string.
std::optional<std::string> extract_final_answer(std::string_view generated);

// Optional judge path for open-ended answers; regex extraction stays the
// primary, deterministic route and this is off unless wired up explicitly.
std::vector<ChatTurn> build_verification_prompt(std::string_view question,
                                                std::string_view reference_answer,
                                                std::string_view candidate_answer);

// "Yes." / "no" -> true/false; anything else is undecided.
std::optional<bool> parse_verification(std::string_view reply);

struct ProbeOutcome {
  std::map<char, double> option_probabilities;
  std::optional<char> predicted;
  bool correct = false;
  std::map<std::string, double> raw_top_logprobs;
};

// Fraction of the reference's adjacent token bigrams (by position) that occur
// as adjacent pairs anywhere in the candidate. References shorter than two
// tokens yield 0.
double adjacent_bigram_overlap(std::string_view reference, std::string_view candidate);

// Deterministic endpoint stand-in: the correct letter's score is
// base_rate + gain * overlap(reference, injected), clamped to [0,1]; the rest
// of the mass is split uniformly over the other letters.
ProbeOutcome mock_probe(const data::Example& e, const std::optional<std::string>& injected,
                        std::string_view reference_rationale, double base_rate, double gain);

}  // namespace cotlab::probe
