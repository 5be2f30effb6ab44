#include "mockgen.hpp"

#include <algorithm>

#include "cotlab/rng.hpp"
#include "cotlab/textops.hpp"

namespace cotlab::pipeline {

std::string mock_rationale(const data::Example& example, std::uint64_t seed) {
  const std::uint64_t h = derive_seed(seed, {example.dataset, example.id, "mockgen"});
  SplitMix64 rng(h);

  // vocabulary from the question stem, padded when the stem runs short
  std::vector<std::string> vocab;
  for (const auto& token : textops::tokenize(example.question)) {
    if (std::find(vocab.begin(), vocab.end(), token) == vocab.end()) vocab.push_back(token);
  }
  const std::size_t period = 3 + h % 10;  // repetition period, 3..12
  while (vocab.size() < period) vocab.push_back("term" + std::to_string(vocab.size()));

  const std::size_t body_len = 9 + rng.below(4);  // 9..12 tokens
  std::vector<std::string> body;
  body.reserve(body_len);
  for (std::size_t i = 0; i < body_len; ++i) body.push_back(vocab[i % period]);

  // fold into sentences of five-or-so tokens
  std::string rationale;
  std::size_t sentence_len = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (!rationale.empty()) rationale.push_back(' ');
    rationale += body[i];
    ++sentence_len;
    const bool last = i + 1 == body.size();
    if (last || sentence_len == 5) {
      rationale.push_back('.');
      sentence_len = 0;
    }
  }
  if (example.answer_value) {
    rationale += " The value is " + *example.answer_value + ".";
  }
  rationale += " Therefore the answer is ";
  rationale.push_back(example.answer_letter);
  rationale.push_back('.');
  return rationale;
}

std::string mock_compress_sentence(const std::string& sentence) {
  const auto tokens = textops::tokenize(sentence);
  const std::size_t keep = std::min<std::size_t>(7, tokens.size());
  return textops::detokenize(
      textops::TokenSequence(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(keep)));
}

}  // namespace cotlab::pipeline
