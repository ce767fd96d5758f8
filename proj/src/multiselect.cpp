#include "mlsort/multiselect.hpp"

#include <algorithm>
#include <string>

#include "mlsort/errors.hpp"

namespace mlsort {
namespace {

struct Search {
  int group = 0;
  std::size_t slot = 0;
  std::uint64_t remaining = 0;  // rank still wanted inside [lo, hi)
  std::vector<std::size_t> lo, hi;
  bool done = false;
  Rng rng;
  SelectionResult result;

  Search(int g, std::size_t s, std::uint64_t k, const SeedSpec& seed)
      : group(g), slot(s), remaining(k),
        rng(seed.sub("g" + std::to_string(g) + "/k" + std::to_string(k))) {
    result.rank = k;
  }
};

// One pivot round of one search.
void step(Search& s, const PeGroup& grp, const LocalSequences& seqs) {
  std::uint64_t total = 0;
  for (int i = 0; i < grp.size; ++i) total += s.hi[i] - s.lo[i];
  if (total == 0) throw InvariantError("multiselect lost its target");

  // Shared random position, located through the prefix sum of window sizes.
  std::uint64_t u = s.rng.below(total);
  int owner = 0;
  while (u >= s.hi[owner] - s.lo[owner]) {
    u -= s.hi[owner] - s.lo[owner];
    ++owner;
  }
  const Element pivot = seqs[grp.member(owner)][s.lo[owner] + u];

  std::vector<std::size_t> below(grp.size);
  std::uint64_t left = 0;
  for (int i = 0; i < grp.size; ++i) {
    const auto& seq = seqs[grp.member(i)];
    const auto first = seq.begin() + static_cast<std::ptrdiff_t>(s.lo[i]);
    const auto last = seq.begin() + static_cast<std::ptrdiff_t>(s.hi[i]);
    below[i] = static_cast<std::size_t>(
        std::lower_bound(first, last, pivot) - seq.begin());
    left += below[i] - s.lo[i];
  }

  ++s.result.rounds;
  if (left >= s.remaining) {
    s.hi = below;
  } else if (left + 1 == s.remaining) {
    below[owner] += 1;
    s.result.splits = std::move(below);
    s.result.splitter = pivot;
    s.done = true;
  } else {
    below[owner] += 1;
    s.lo = std::move(below);
    s.remaining -= left + 1;
  }
}

}  // namespace

std::vector<std::vector<SelectionResult>> multiselect_groups(
    Machine& machine, const Layout& layout, const LocalSequences& local_sorted,
    const std::vector<std::vector<std::uint64_t>>& ranks,
    const SeedSpec& seed) {
  if (static_cast<int>(ranks.size()) != layout.groups()) {
    throw PreconditionError("one rank list per group required");
  }
  std::vector<Search> searches;
  std::size_t width = 0;
  for (int g = 0; g < layout.groups(); ++g) {
    const PeGroup grp = layout.group(g);
    std::uint64_t total = 0;
    for (int i = 0; i < grp.size; ++i) {
      const auto& seq = local_sorted[grp.member(i)];
      if (!is_sorted_tiebreak(seq)) {
        throw PreconditionError("multiselect input of PE " +
                                std::to_string(grp.member(i)) +
                                " is not sorted");
      }
      total += seq.size();
    }
    const auto& rk = ranks[g];
    width = std::max(width, rk.size());
    for (std::size_t s = 0; s < rk.size(); ++s) {
      if (rk[s] < 1 || rk[s] > total) {
        throw PreconditionError("rank " + std::to_string(rk[s]) +
                                " outside 1.." + std::to_string(total));
      }
      if (s > 0 && rk[s] <= rk[s - 1]) {
        throw PreconditionError("ranks must be strictly ascending");
      }
      Search search(g, s, rk[s], seed);
      search.lo.assign(grp.size, 0);
      search.hi.resize(grp.size);
      for (int i = 0; i < grp.size; ++i) {
        search.hi[i] = local_sorted[grp.member(i)].size();
      }
      searches.push_back(std::move(search));
    }
  }

  std::vector<std::size_t> active(searches.size());
  for (std::size_t i = 0; i < active.size(); ++i) active[i] = i;
  while (!active.empty()) {
    // Finished searches still occupy their slot of the vector collectives.
    machine.charge_collective(layout, width);  // prefix sum of window sizes
    machine.charge_collective(layout, width);  // pivot broadcast
    machine.charge_collective(layout, width);  // allreduce of left sizes
    parallel_for(machine.exec(), active.size(), [&](std::size_t i) {
      Search& s = searches[active[i]];
      step(s, layout.group(s.group), local_sorted);
    });
    std::erase_if(active, [&](std::size_t i) { return searches[i].done; });
  }

  std::vector<std::vector<SelectionResult>> out(layout.groups());
  for (int g = 0; g < layout.groups(); ++g) out[g].resize(ranks[g].size());
  for (auto& s : searches) out[s.group][s.slot] = std::move(s.result);
  return out;
}

std::vector<SelectionResult> multiselect_many(
    Machine& machine, const PeGroup& group, const LocalSequences& local_sorted,
    const std::vector<std::uint64_t>& ranks, const SeedSpec& seed) {
  return multiselect_groups(machine, Layout::single(group), local_sorted, {ranks},
                          seed)[0];
}

SelectionResult multiselect(Machine& machine, const PeGroup& group,
                            const LocalSequences& local_sorted,
                            std::uint64_t rank, const SeedSpec& seed) {
  return multiselect_many(machine, group, local_sorted, {rank}, seed)[0];
}

}  // namespace mlsort
