#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace cotlab {

// Recorded in every result file so runs can be matched to the generator that
// produced them.
inline constexpr std::string_view kRngIdentity = "splitmix64-fisher-yates-v1";

// SplitMix64. Fixed algorithm, so a seed reproduces byte-identical output on
// every platform (std::shuffle and the std distributions do not guarantee
// that).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased draw in [0, bound) via rejection sampling. bound must be >= 1.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

template <typename T>
void fisher_yates(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

// Stable sub-seed for (base seed, context strings). Used to give every
// (example, condition) cell its own stream while keeping byte determinism.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::string_view> context);

}  // namespace cotlab
