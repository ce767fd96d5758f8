#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace mlsort {

// A key plus the identity of its input slot. Comparing the full triple
// lexicographically makes every element of an instance distinct, so all
// algorithms can assume unique keys.
struct Element {
  std::uint64_t key = 0;
  std::uint32_t origin_pe = 0;   // 0-based PE index that held the input
  std::uint32_t origin_pos = 0;  // position in that PE's input array

  friend constexpr auto operator<=>(const Element&, const Element&) = default;
};

enum class Order { Less, Greater };

// Strict tie-broken order. Throws InvariantError when both arguments carry
// the same (key, pe, pos) triple, which means the input identity was
// duplicated somewhere.
Order compare_tiebreak(const Element& x, const Element& y);

// Builds the local input of one PE from raw keys, tagging each with its slot.
std::vector<Element> tag_elements(std::span<const std::uint64_t> keys,
                                  std::uint32_t pe);

bool is_sorted_tiebreak(std::span<const Element> seq);

}  // namespace mlsort
