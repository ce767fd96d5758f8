#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mlsort/element.hpp"
#include "mlsort/random.hpp"
#include "mlsort/simnet.hpp"

namespace mlsort {

// Element of global rank `rank` (1-based) in the union of a group's sorted
// sequences, and where it cuts each sequence: splits[i] elements of member i
// are <= splitter, so the splits sum to `rank`.
struct SelectionResult {
  std::vector<std::size_t> splits;
  std::uint64_t rank = 0;
  Element splitter{};
  int rounds = 0;
};

// Per-PE sorted sequences, indexed by global PE.
using LocalSequences = std::vector<std::span<const Element>>;

// Randomized multisequence quickselect for every group of `layout` at once.
// ranks[g] must be strictly ascending and within 1..(group total). All
// searches advance in lockstep rounds; each round costs one vector prefix sum
// (pivot location), one vector broadcast (pivot value) and one vector
// allreduce (left-part sizes), each of length max_g |ranks[g]|.
std::vector<std::vector<SelectionResult>> multiselect_groups(
    Machine& machine, const Layout& layout, const LocalSequences& local_sorted,
    const std::vector<std::vector<std::uint64_t>>& ranks, const SeedSpec& seed);

std::vector<SelectionResult> multiselect_many(
    Machine& machine, const PeGroup& group, const LocalSequences& local_sorted,
    const std::vector<std::uint64_t>& ranks, const SeedSpec& seed);

SelectionResult multiselect(Machine& machine, const PeGroup& group,
                            const LocalSequences& local_sorted,
                            std::uint64_t rank, const SeedSpec& seed);

}  // namespace mlsort
