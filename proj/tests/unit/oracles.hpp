#pragma once
// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the library's enumeration or operator code.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

// Every composition of `total` into `cells` non-negative parts, by recursion.
inline std::vector<std::vector<std::uint32_t>> compositions(std::size_t cells, std::uint32_t total) {
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> cur(cells, 0);
  std::function<void(std::size_t, std::uint32_t)> rec = [&](std::size_t i, std::uint32_t left) {
    if (i + 1 == cells) {
      cur[i] = left;
      out.push_back(cur);
      return;
    }
    for (std::uint32_t c = 0; c <= left; ++c) {
      cur[i] = c;
      rec(i + 1, left - c);
    }
  };
  rec(0, total);
  return out;
}

// Colexicographic order: compare from the last cell backwards.
inline bool colex_less(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  for (std::size_t k = a.size(); k-- > 0;) {
    if (a[k] != b[k]) return a[k] < b[k];
  }
  return false;
}

inline std::vector<std::vector<std::uint32_t>> colex_sorted(std::size_t cells, std::uint32_t total) {
  auto all = compositions(cells, total);
  std::sort(all.begin(), all.end(), colex_less);
  return all;
}

inline std::uint64_t choose(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace oracle
