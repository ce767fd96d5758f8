#pragma once

#include <cstdint>
#include <vector>

#include "mlsort/element.hpp"

namespace mlsort {

// Per-PE element counts after one level's data delivery.
struct LevelLoad {
  int level = 0;
  int groups = 0;  // number of PE groups the level delivered into
  std::uint64_t min_load = 0;
  std::uint64_t max_load = 0;
};

struct SortResult {
  std::vector<std::vector<Element>> data;  // per PE, sorted
  std::vector<LevelLoad> levels;
};

LevelLoad measure_loads(const std::vector<std::vector<Element>>& data,
                        int level, int groups);

// Output contract of a distributed sort: every PE sorted and no element on a
// PE exceeds any element on a later PE.
bool globally_sorted(const std::vector<std::vector<Element>>& data);

}  // namespace mlsort
