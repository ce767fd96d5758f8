#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "mlsort/element.hpp"
#include "mlsort/simnet.hpp"

namespace mlsort {

// PE grid for work-inefficient sorting. Member i of a group sits at row
// i / cols, column i % cols.
struct GridShape {
  int rows = 1;
  int cols = 1;
  bool operator==(const GridShape&) const = default;
};

// 2^ceil(P/2) x 2^floor(P/2) for p = 2^P; UnsupportedTopology otherwise.
GridShape grid_shape(int p);

struct RankedElement {
  static constexpr std::size_t kWords = 2;
  Element element;
  std::uint64_t global_rank = 0;  // 0-based
};

inline constexpr std::size_t kNoBound = std::numeric_limits<std::size_t>::max();

// Ranks every input element within its group: local sort, gossip along grid
// rows and columns, rank each column element against the row elements by
// merging, sum those partial ranks over the column. Result is indexed by
// global PE and holds that PE's own elements in sorted order. Group sizes
// must be powers of two; more than max_per_pe inputs on a PE is an error.
std::vector<std::vector<RankedElement>> fast_rank_sort(
    Machine& machine, const Layout& layout,
    const std::vector<std::vector<Element>>& local,
    std::size_t max_per_pe = kNoBound);

// Same on an explicit grid shape, which need not be a power of two.
std::vector<std::vector<RankedElement>> fast_rank_sort_grid(
    Machine& machine, const Layout& layout, GridShape shape,
    const std::vector<std::vector<Element>>& local,
    std::size_t max_per_pe = kNoBound);

// Elements of the given ranks (strictly ascending) of every group, in rank
// order, replicated on all members; one result per group. Priced as an
// allgather of the wanted elements.
std::vector<std::vector<Element>> extract_by_ranks(
    Machine& machine, const Layout& layout,
    const std::vector<std::vector<RankedElement>>& ranked,
    const std::vector<std::vector<std::uint64_t>>& wanted);

}  // namespace mlsort
