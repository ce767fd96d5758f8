#include "mlsort/fastsort.hpp"

#include <algorithm>
#include <string>

#include "mlsort/errors.hpp"

namespace mlsort {

GridShape grid_shape(int p) {
  if (p < 1 || !is_power_of_two(static_cast<std::uint64_t>(p))) {
    throw UnsupportedTopology("fast sort needs a power-of-two group, got " +
                              std::to_string(p));
  }
  const int P = ceil_log2(static_cast<std::uint64_t>(p));
  return {1 << ((P + 1) / 2), 1 << (P / 2)};
}

std::vector<std::vector<RankedElement>> fast_rank_sort(
    Machine& machine, const Layout& layout,
    const std::vector<std::vector<Element>>& local, std::size_t max_per_pe) {
  return fast_rank_sort_grid(machine, layout, grid_shape(layout.group_size),
                             local, max_per_pe);
}

std::vector<std::vector<RankedElement>> fast_rank_sort_grid(
    Machine& machine, const Layout& layout, GridShape shape,
    const std::vector<std::vector<Element>>& local, std::size_t max_per_pe) {
  if (shape.rows * shape.cols != layout.group_size) {
    throw PreconditionError("grid shape does not cover the group");
  }
  const int p = machine.size();
  std::vector<std::vector<Element>> sorted(p);
  machine.for_each_pe(layout, [&](int pe) {
    if (local[pe].size() > max_per_pe) {
      throw PreconditionError("PE " + std::to_string(pe) + " holds " +
                              std::to_string(local[pe].size()) +
                              " elements, bound is " +
                              std::to_string(max_per_pe));
    }
    sorted[pe] = local[pe];
    std::sort(sorted[pe].begin(), sorted[pe].end());
  });

  // Row sets first, then column sets, for every group.
  std::vector<std::vector<int>> rows, cols;
  for (int g = 0; g < layout.groups(); ++g) {
    const PeGroup grp = layout.group(g);
    for (int r = 0; r < shape.rows; ++r) {
      auto& set = rows.emplace_back();
      for (int c = 0; c < shape.cols; ++c) set.push_back(grp.member(r * shape.cols + c));
    }
    for (int c = 0; c < shape.cols; ++c) {
      auto& set = cols.emplace_back();
      for (int r = 0; r < shape.rows; ++r) set.push_back(grp.member(r * shape.cols + c));
    }
  }
  const auto row_data = machine.gossip_merge_sets(rows, sorted);
  const auto col_data = machine.gossip_merge_sets(cols, sorted);

  auto row_of = [&](int pe) {
    const int g = layout.group_of(pe);
    return g * shape.rows + layout.group(g).rank_of(pe) / shape.cols;
  };
  auto col_of = [&](int pe) {
    const int g = layout.group_of(pe);
    return g * shape.cols + layout.group(g).rank_of(pe) % shape.cols;
  };

  // Partial rank of each column element: number of row elements below it.
  std::vector<std::vector<std::uint64_t>> partial(p);
  machine.for_each_pe(layout, [&](int pe) {
    const auto& R = row_data[row_of(pe)];
    const auto& C = col_data[col_of(pe)];
    auto& out = partial[pe];
    out.resize(C.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < C.size(); ++i) {
      while (k < R.size() && R[k] < C[i]) ++k;
      out[i] = k;
    }
  });

  // Sum over each column; all columns reduce concurrently.
  std::vector<std::vector<std::uint64_t>> ranks(cols.size());
  std::uint64_t width = 0;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    ranks[c].assign(col_data[c].size(), 0);
    for (int pe : cols[c]) {
      for (std::size_t i = 0; i < ranks[c].size(); ++i) ranks[c][i] += partial[pe][i];
    }
    width = std::max<std::uint64_t>(width, ranks[c].size());
  }
  machine.charge_collective(shape.rows, width);

  std::vector<std::vector<RankedElement>> out(p);
  machine.for_each_pe(layout, [&](int pe) {
    const int c = col_of(pe);
    const auto& C = col_data[c];
    for (std::size_t i = 0; i < C.size(); ++i) {
      if (std::binary_search(sorted[pe].begin(), sorted[pe].end(), C[i])) {
        out[pe].push_back({C[i], ranks[c][i]});
      }
    }
  });
  return out;
}

std::vector<std::vector<Element>> extract_by_ranks(
    Machine& machine, const Layout& layout,
    const std::vector<std::vector<RankedElement>>& ranked,
    const std::vector<std::vector<std::uint64_t>>& wanted) {
  if (static_cast<int>(wanted.size()) != layout.groups()) {
    throw PreconditionError("one rank list per group required");
  }
  std::vector<std::vector<Element>> out(layout.groups());
  std::uint64_t width = 0;
  for (int g = 0; g < layout.groups(); ++g) {
    const PeGroup grp = layout.group(g);
    std::vector<RankedElement> all;
    for (int i = 0; i < grp.size; ++i) {
      const auto& v = ranked[grp.member(i)];
      all.insert(all.end(), v.begin(), v.end());
    }
    const auto& w = wanted[g];
    for (std::size_t s = 0; s < w.size(); ++s) {
      if (w[s] >= all.size()) {
        throw PreconditionError("rank " + std::to_string(w[s]) +
                                " out of range for " +
                                std::to_string(all.size()) + " elements");
      }
      if (s > 0 && w[s] <= w[s - 1]) {
        throw PreconditionError("wanted ranks must be strictly ascending");
      }
    }
    std::vector<const Element*> by_rank(all.size(), nullptr);
    for (const auto& re : all) {
      if (re.global_rank >= all.size() || by_rank[re.global_rank]) {
        throw InvariantError("ranks are not a permutation");
      }
      by_rank[re.global_rank] = &re.element;
    }
    for (auto r : w) out[g].push_back(*by_rank[r]);
    width = std::max<std::uint64_t>(width, w.size());
  }
  machine.charge_collective(layout, width);
  return out;
}

}  // namespace mlsort
