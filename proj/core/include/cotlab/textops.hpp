#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cotlab::textops {

// Whitespace-delimited tokens. Every token is non-empty and contains no
// whitespace scalar; detokenize(tokenize(x)) re-tokenizes to the same list.
using TokenSequence = std::vector<std::string>;

// Sentences keep their terminal punctuation and carry no outer whitespace, so
// join + re-split round-trips.
using SentenceList = std::vector<std::string>;

using Seed = std::uint64_t;

enum class Direction { FromStart, FromEnd };

bool is_whitespace_scalar(char32_t c);
bool is_sentence_terminal(char32_t c);

// Splits on runs of Unicode whitespace; punctuation stays attached to its
// neighbours. Empty or all-whitespace input yields an empty sequence.
TokenSequence tokenize(std::string_view text);

std::string detokenize(const TokenSequence& tokens);

// Splits after any of . ! ? ; when immediately followed by whitespace.
// Decimal points and an unterminated tail do not split.
SentenceList split_sentences(std::string_view text);

std::string join_sentences(const SentenceList& sentences);

// Uniform seeded permutation; sentence interiors untouched.
SentenceList shuffle_sentences(const SentenceList& sentences, Seed seed);

// Partitions into consecutive n-token blocks (final block may be short),
// permutes blocks uniformly, preserves order inside each block. n == 1 is the
// global word shuffle. Throws std::invalid_argument when n == 0.
TokenSequence ngram_block_shuffle(const TokenSequence& tokens, std::size_t n, Seed seed);

// Keeps floor(keep_fraction * size) tokens from the chosen end.
TokenSequence truncate_fraction(const TokenSequence& tokens, double keep_fraction,
                                Direction direction);

}  // namespace cotlab::textops
