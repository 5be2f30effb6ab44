#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cotlab/textops.hpp"

namespace cotlab::testing {

template <typename T>
std::map<T, std::size_t> multiset_of(const std::vector<T>& items) {
  std::map<T, std::size_t> out;
  for (const auto& item : items) ++out[item];
  return out;
}

namespace detail {

using Block = std::vector<std::string>;

inline bool parse_blocks(const std::vector<std::string>& output, std::size_t pos,
                         std::map<Block, std::size_t>& remaining) {
  if (pos == output.size()) {
    return std::all_of(remaining.begin(), remaining.end(),
                       [](const auto& kv) { return kv.second == 0; });
  }
  for (auto& [block, count] : remaining) {
    if (count == 0 || pos + block.size() > output.size()) continue;
    if (!std::equal(block.begin(), block.end(), output.begin() + static_cast<long>(pos))) {
      continue;
    }
    --count;
    if (parse_blocks(output, pos + block.size(), remaining)) {
      ++count;
      return true;
    }
    ++count;
  }
  return false;
}

}  // namespace detail

// True when `output` is a concatenation of some permutation of the
// consecutive n-blocks of `input` (block interiors intact).
inline bool is_block_permutation(const std::vector<std::string>& input,
                                 const std::vector<std::string>& output, std::size_t n) {
  if (input.size() != output.size()) return false;
  if (input.empty()) return true;
  std::map<detail::Block, std::size_t> blocks;
  for (std::size_t begin = 0; begin < input.size(); begin += n) {
    const std::size_t end = std::min(begin + n, input.size());
    ++blocks[detail::Block(input.begin() + static_cast<long>(begin),
                           input.begin() + static_cast<long>(end))];
  }
  return detail::parse_blocks(output, 0, blocks);
}

// Spearman rank correlation with average ranks for ties.
inline double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto ranks = [](const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> rank(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
      i = j + 1;
    }
    return rank;
  };
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  const std::size_t n = xs.size();
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double cov = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (rx[i] - mx) * (ry[i] - my);
    vx += (rx[i] - mx) * (rx[i] - mx);
    vy += (ry[i] - my) * (ry[i] - my);
  }
  if (vx == 0.0 || vy == 0.0) return 0.0;
  return cov / std::sqrt(vx * vy);
}

}  // namespace cotlab::testing
