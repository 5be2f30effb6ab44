#include "cotlab/textops.hpp"

#include <cmath>
#include <stdexcept>

#include "cotlab/rng.hpp"

namespace cotlab::textops {

namespace {

struct Scalar {
  char32_t value;
  std::size_t size;  // bytes consumed
};

// Permissive UTF-8 decode: an invalid lead/continuation byte is treated as a
// single opaque (non-whitespace) scalar so tokens always round-trip bytewise.
Scalar decode_scalar(std::string_view s, std::size_t pos) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  const unsigned char b0 = byte(pos);
  if (b0 < 0x80) return {b0, 1};
  const auto cont = [&](std::size_t i) {
    return i < s.size() && (byte(i) & 0xc0) == 0x80;
  };
  if ((b0 & 0xe0) == 0xc0 && cont(pos + 1)) {
    return {static_cast<char32_t>((b0 & 0x1fu) << 6 | (byte(pos + 1) & 0x3fu)), 2};
  }
  if ((b0 & 0xf0) == 0xe0 && cont(pos + 1) && cont(pos + 2)) {
    return {static_cast<char32_t>((b0 & 0x0fu) << 12 | (byte(pos + 1) & 0x3fu) << 6 |
                                  (byte(pos + 2) & 0x3fu)),
            3};
  }
  if ((b0 & 0xf8) == 0xf0 && cont(pos + 1) && cont(pos + 2) && cont(pos + 3)) {
    return {static_cast<char32_t>((b0 & 0x07u) << 18 | (byte(pos + 1) & 0x3fu) << 12 |
                                  (byte(pos + 2) & 0x3fu) << 6 | (byte(pos + 3) & 0x3fu)),
            4};
  }
  return {0xfffd, 1};
}

}  // namespace

bool is_whitespace_scalar(char32_t c) {
  switch (c) {
    case 0x09:
    case 0x0a:
    case 0x0b:
    case 0x0c:
    case 0x0d:
    case 0x20:
    case 0x85:
    case 0xa0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202f:
    case 0x205f:
    case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200a;
  }
}

bool is_sentence_terminal(char32_t c) {
  return c == U'.' || c == U'!' || c == U'?' || c == U';';
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence tokens;
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const Scalar sc = decode_scalar(text, pos);
    if (is_whitespace_scalar(sc.value)) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.append(text.substr(pos, sc.size));
    }
    pos += sc.size;
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string detokenize(const TokenSequence& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out.append(tokens[i]);
  }
  return out;
}

SentenceList split_sentences(std::string_view text) {
  SentenceList sentences;
  std::string current;
  std::size_t pos = 0;
  const auto flush = [&] {
    // trim outer whitespace so join + re-split is stable
    std::size_t b = 0;
    std::size_t e = current.size();
    while (b < e && static_cast<unsigned char>(current[b]) <= 0x20) ++b;
    while (e > b && static_cast<unsigned char>(current[e - 1]) <= 0x20) --e;
    if (e > b) sentences.push_back(current.substr(b, e - b));
    current.clear();
  };
  while (pos < text.size()) {
    const Scalar sc = decode_scalar(text, pos);
    if (current.empty() && is_whitespace_scalar(sc.value)) {
      pos += sc.size;  // sentences carry no leading whitespace
      continue;
    }
    current.append(text.substr(pos, sc.size));
    pos += sc.size;
    if (is_sentence_terminal(sc.value) && pos < text.size()) {
      const Scalar next = decode_scalar(text, pos);
      if (is_whitespace_scalar(next.value)) flush();
    }
  }
  flush();
  return sentences;
}

std::string join_sentences(const SentenceList& sentences) {
  std::string out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out.append(sentences[i]);
  }
  return out;
}

SentenceList shuffle_sentences(const SentenceList& sentences, Seed seed) {
  SentenceList shuffled = sentences;
  SplitMix64 rng(seed);
  fisher_yates(shuffled, rng);
  return shuffled;
}

TokenSequence ngram_block_shuffle(const TokenSequence& tokens, std::size_t n, Seed seed) {
  if (n == 0) throw std::invalid_argument("ngram_block_shuffle: block size must be >= 1");
  if (n >= tokens.size()) return tokens;  // single block, identity

  std::vector<std::pair<std::size_t, std::size_t>> blocks;  // [begin, end)
  for (std::size_t begin = 0; begin < tokens.size(); begin += n) {
    blocks.emplace_back(begin, std::min(begin + n, tokens.size()));
  }
  SplitMix64 rng(seed);
  fisher_yates(blocks, rng);

  TokenSequence out;
  out.reserve(tokens.size());
  for (const auto& [begin, end] : blocks) {
    for (std::size_t i = begin; i < end; ++i) out.push_back(tokens[i]);
  }
  return out;
}

TokenSequence truncate_fraction(const TokenSequence& tokens, double keep_fraction,
                                Direction direction) {
  if (!(keep_fraction >= 0.0 && keep_fraction <= 1.0)) {
    throw std::invalid_argument("truncate_fraction: keep_fraction must be in [0,1]");
  }
  const auto keep = static_cast<std::size_t>(
      std::floor(keep_fraction * static_cast<double>(tokens.size())));
  if (keep >= tokens.size()) return tokens;
  if (direction == Direction::FromStart) {
    return TokenSequence(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  return TokenSequence(tokens.end() - static_cast<std::ptrdiff_t>(keep), tokens.end());
}

}  // namespace cotlab::textops
