#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace mlsort {

// k-way merge of sorted runs with a loser (tournament) tree: each output
// element costs one leaf-to-root replay, i.e. ceil(log2 k) comparisons.
// Equal elements are taken from the lower-numbered run first.
template <class T, class Less = std::less<T>>
std::vector<T> multiway_merge(std::span<const std::span<const T>> runs,
                              Less less = {}) {
  const std::size_t k = runs.size();
  std::size_t total = 0;
  for (const auto& r : runs) total += r.size();

  std::vector<T> out;
  out.reserve(total);
  if (k == 0) return out;
  if (k == 1) {
    out.assign(runs[0].begin(), runs[0].end());
    return out;
  }

  std::size_t leaves = 1;
  while (leaves < k) leaves <<= 1;

  std::vector<std::size_t> pos(leaves, 0);
  auto exhausted = [&](std::size_t r) {
    return r >= k || pos[r] >= runs[r].size();
  };
  auto beats = [&](std::size_t a, std::size_t b) {
    if (exhausted(a)) return false;
    if (exhausted(b)) return true;
    const T& x = runs[a][pos[a]];
    const T& y = runs[b][pos[b]];
    if (less(x, y)) return true;
    if (less(y, x)) return false;
    return a < b;
  };

  std::vector<std::size_t> loser(leaves, 0);
  {
    std::vector<std::size_t> winner(2 * leaves);
    for (std::size_t i = 0; i < leaves; ++i) winner[leaves + i] = i;
    for (std::size_t node = leaves - 1; node >= 1; --node) {
      const std::size_t a = winner[2 * node];
      const std::size_t b = winner[2 * node + 1];
      if (beats(a, b)) {
        winner[node] = a;
        loser[node] = b;
      } else {
        winner[node] = b;
        loser[node] = a;
      }
    }
    loser[0] = winner[1];
  }

  std::size_t champion = loser[0];
  for (std::size_t t = 0; t < total; ++t) {
    out.push_back(runs[champion][pos[champion]]);
    ++pos[champion];
    std::size_t current = champion;
    for (std::size_t node = (leaves + champion) >> 1; node >= 1; node >>= 1) {
      if (beats(loser[node], current)) std::swap(loser[node], current);
    }
    champion = current;
  }
  return out;
}

template <class T, class Less = std::less<T>>
std::vector<T> multiway_merge(const std::vector<std::vector<T>>& runs,
                              Less less = {}) {
  std::vector<std::span<const T>> views(runs.begin(), runs.end());
  return multiway_merge<T, Less>(std::span<const std::span<const T>>(views),
                                 less);
}

}  // namespace mlsort
