#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

// Exact two-sided binomial(1/2) tail oracle built from Pascal's triangle in
// 128-bit integers; a separate route from the implementation's multiplicative
// coefficients.
namespace cotlab::testing::binomial_oracle {

inline long double two_sided_p(std::size_t b, std::size_t c) {
  const std::size_t m = b + c;
  if (m == 0) return 1.0L;
  std::vector<unsigned __int128> row{1};
  for (std::size_t i = 1; i <= m; ++i) {
    std::vector<unsigned __int128> next(i + 1, 1);
    for (std::size_t j = 1; j < i; ++j) next[j] = row[j - 1] + row[j];
    row = std::move(next);
  }
  const std::size_t k = std::min(b, c);
  unsigned __int128 tail = 0;
  for (std::size_t i = 0; i <= k; ++i) tail += row[i];
  long double denom = 1.0L;
  for (std::size_t i = 0; i < m; ++i) denom *= 2.0L;
  const long double p = 2.0L * static_cast<long double>(tail) / denom;
  return std::min(p, 1.0L);
}

}  // namespace cotlab::testing::binomial_oracle
