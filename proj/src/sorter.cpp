#include "mlsort/sorter.hpp"

#include <algorithm>

namespace mlsort {

LevelLoad measure_loads(const std::vector<std::vector<Element>>& data,
                        int level, int groups) {
  LevelLoad load{level, groups, data.empty() ? 0 : data[0].size(), 0};
  for (const auto& v : data) {
    load.min_load = std::min<std::uint64_t>(load.min_load, v.size());
    load.max_load = std::max<std::uint64_t>(load.max_load, v.size());
  }
  return load;
}

bool globally_sorted(const std::vector<std::vector<Element>>& data) {
  const Element* prev = nullptr;
  for (const auto& v : data) {
    for (const auto& e : v) {
      if (prev && !(*prev < e)) return false;
      prev = &e;
    }
  }
  return true;
}

}  // namespace mlsort
