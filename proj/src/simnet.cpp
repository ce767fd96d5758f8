#include "mlsort/simnet.hpp"

#include <string>

namespace mlsort {

int ceil_log2(std::uint64_t x) {
  int l = 0;
  while ((std::uint64_t{1} << l) < x) ++l;
  return l;
}

bool is_power_of_two(std::uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

Machine::Machine(int p, CostParams cost, Exec exec)
    : p_(p), cost_(cost), exec_(exec), ledger_(p) {
  if (p < 1) throw PreconditionError("machine needs at least one PE");
  if (cost.alpha < 0 || cost.beta < 0) {
    throw PreconditionError("cost parameters must be non-negative");
  }
}

void Machine::check_layout(const Layout& layout) const {
  if (layout.group_size < 1 || layout.count < 1 || layout.first < 0 ||
      layout.first + layout.pes() > p_) {
    throw AddressingError("layout exceeds the machine");
  }
}

void Machine::charge_collective(const Layout& layout, std::uint64_t words) {
  charge_collective(layout.group_size, words);
}

void Machine::charge_collective(int set_size, std::uint64_t words) {
  if (set_size <= 1) return;
  const double cost = cost_.beta * static_cast<double>(words) +
                      cost_.alpha * ceil_log2(static_cast<std::uint64_t>(set_size));
  ledger_.charge(cost, words);
}

std::vector<std::vector<Element>> Machine::gossip_merge_sets(
    const std::vector<std::vector<int>>& sets,
    const std::vector<std::vector<Element>>& per_pe) {
  std::vector<std::vector<Element>> out(sets.size());
  std::uint64_t max_recv = 0;
  int max_set = 1;

  parallel_for(exec_, sets.size(), [&](std::size_t s) {
    std::vector<std::span<const Element>> runs;
    for (int pe : sets[s]) {
      const auto& seq = per_pe[pe];
      if (!is_sorted_tiebreak(seq)) {
        throw PreconditionError("gossip input of PE " + std::to_string(pe) +
                                " is not sorted");
      }
      runs.emplace_back(seq);
    }
    out[s] = multiway_merge<Element>(
        std::span<const std::span<const Element>>(runs));
  });

  // Volume: in the hypercube algorithm every member receives, over
  // ceil(log2 P) rounds, everything except its own contribution. The
  // direct-gather fallback for other sizes moves the same amount.
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const auto total = static_cast<std::uint64_t>(out[s].size());
    for (int pe : sets[s]) {
      max_recv = std::max<std::uint64_t>(max_recv, total - per_pe[pe].size());
    }
    max_set = std::max(max_set, static_cast<int>(sets[s].size()));
  }
  if (max_set > 1) {
    ledger_.charge(cost_.beta * static_cast<double>(max_recv) +
                       cost_.alpha * ceil_log2(max_set),
                   max_recv);
  }
  return out;
}

std::vector<std::vector<Element>> Machine::gossip_merge(
    const Layout& layout, const std::vector<std::vector<Element>>& per_pe) {
  check_layout(layout);
  std::vector<std::vector<int>> sets(layout.groups());
  for (int g = 0; g < layout.groups(); ++g) {
    const PeGroup grp = layout.group(g);
    for (int i = 0; i < grp.size; ++i) sets[g].push_back(grp.member(i));
  }
  return gossip_merge_sets(sets, per_pe);
}

}  // namespace mlsort
