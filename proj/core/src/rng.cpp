#include "cotlab/rng.hpp"

#include "cotlab/digest.hpp"

namespace cotlab {

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::string_view> context) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix_byte = [&h](unsigned char b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  };
  for (int i = 0; i < 8; ++i) mix_byte(static_cast<unsigned char>(base >> (8 * i)));
  for (const auto part : context) {
    mix_byte(0x1f);  // separator so ("ab","c") != ("a","bc")
    for (const char c : part) mix_byte(static_cast<unsigned char>(c));
  }
  // One extra scramble so similar contexts land far apart.
  return SplitMix64(h).next();
}

}  // namespace cotlab
