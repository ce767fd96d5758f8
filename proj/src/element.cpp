#include "mlsort/element.hpp"

#include <algorithm>
#include <string>

#include "mlsort/errors.hpp"

namespace mlsort {

Order compare_tiebreak(const Element& x, const Element& y) {
  const auto c = x <=> y;
  if (c == 0) {
    throw InvariantError("duplicated element identity (key " +
                         std::to_string(x.key) + ", pe " +
                         std::to_string(x.origin_pe) + ", pos " +
                         std::to_string(x.origin_pos) + ")");
  }
  return c < 0 ? Order::Less : Order::Greater;
}

std::vector<Element> tag_elements(std::span<const std::uint64_t> keys,
                                  std::uint32_t pe) {
  std::vector<Element> out;
  out.reserve(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    out.push_back({keys[i], pe, static_cast<std::uint32_t>(i)});
  }
  return out;
}

bool is_sorted_tiebreak(std::span<const Element> seq) {
  return std::adjacent_find(seq.begin(), seq.end(),
                            [](const Element& a, const Element& b) {
                              return !(a < b);
                            }) == seq.end();
}

}  // namespace mlsort
