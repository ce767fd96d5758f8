#include "mlsort/rlm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlsort/errors.hpp"
#include "mlsort/multiselect.hpp"

namespace mlsort {

LevelPlan make_level_plan(int p, int k) {
  if (p < 1 || k < 1) throw ConfigError("need p >= 1 and k >= 1");
  LevelPlan plan;
  int rest = p;
  for (int left = k; left > 0; --left) {
    if (left == 1) {
      plan.r.push_back(rest);
      break;
    }
    const double share = std::log(static_cast<double>(rest)) / left;
    int best = 1;
    double best_gap = share;
    for (int d = 2; d <= rest; ++d) {
      if (rest % d != 0) continue;
      const double gap = std::abs(std::log(static_cast<double>(d)) - share);
      if (gap <= best_gap + 1e-12) {
        best = d;
        best_gap = gap;
      }
    }
    plan.r.push_back(best);
    rest /= best;
  }
  return plan;
}

void validate_level_plan(const LevelPlan& plan, int p) {
  if (plan.r.empty()) throw ConfigError("level plan has no levels");
  long long prod = 1;
  for (int r : plan.r) {
    if (r < 1) throw ConfigError("level group counts must be positive");
    prod *= r;
    if (prod > p) break;
  }
  if (prod != p) {
    throw ConfigError("level group counts multiply to " + std::to_string(prod) +
                      ", expected p = " + std::to_string(p));
  }
}

std::vector<Element> merge_runs(const std::vector<std::vector<Element>>& runs) {
  return multiway_merge(runs);
}

SortResult rlm_sort(Machine& machine, std::vector<std::vector<Element>> data,
                    const RlmOptions& options) {
  const int p = machine.size();
  validate_level_plan(options.plan, p);
  data.resize(p);
  CostLedger& ledger = machine.ledger();
  SortResult result;

  std::size_t input_max = 0;
  if (options.scheme == Scheme::Deterministic) {
    PhaseScope scope(ledger, 1, Phase::SplitterSelection);
    std::vector<std::vector<std::uint64_t>> sizes(p);
    for (int pe = 0; pe < p; ++pe) sizes[pe] = {data[pe].size()};
    input_max = machine.allreduce_vec(machine.all(), sizes, [](auto a, auto b) {
      return std::max(a, b);
    })[0][0];
  }
  {
    PhaseScope scope(ledger, 1, Phase::LocalSorting);
    machine.for_each_pe(machine.all(), [&](int pe) {
      std::sort(data[pe].begin(), data[pe].end());
    });
  }

  int group_size = p;
  for (int level = 1; level <= options.plan.levels(); ++level) {
    const int r = options.plan.r[level - 1];
    const Layout parent{0, group_size, p / group_size};
    const std::string tag = "level" + std::to_string(level);

    // Cut positions: subgroup t receives floor(n_g/r) elements plus one more
    // for the first n_g mod r subgroups.
    std::vector<std::vector<std::size_t>> cuts(p);
    {
      PhaseScope scope(ledger, level, Phase::SplitterSelection);
      std::vector<std::vector<std::uint64_t>> sizes(p);
      for (int pe = 0; pe < p; ++pe) sizes[pe] = {data[pe].size()};
      const auto totals = machine.allreduce_vec(
          parent, sizes, [](std::uint64_t a, std::uint64_t b) { return a + b; });

      std::vector<std::vector<std::uint64_t>> bounds(parent.groups());
      std::vector<std::vector<std::uint64_t>> ranks(parent.groups());
      for (int g = 0; g < parent.groups(); ++g) {
        const std::uint64_t n = totals[g][0];
        const std::uint64_t base = n / r, extra = n % r;
        for (int t = 1; t < r; ++t) {
          const std::uint64_t b = t * base + std::min<std::uint64_t>(t, extra);
          bounds[g].push_back(b);
          if (b > 0 && b < n && (ranks[g].empty() || ranks[g].back() != b)) {
            ranks[g].push_back(b);
          }
        }
      }
      LocalSequences views(data.begin(), data.end());
      const auto sel = multiselect_groups(machine, parent, views, ranks,
                                          options.seed.sub("select/" + tag));
      for (int g = 0; g < parent.groups(); ++g) {
        const PeGroup grp = parent.group(g);
        const std::uint64_t n = totals[g][0];
        for (int i = 0; i < grp.size; ++i) {
          const int pe = grp.member(i);
          auto& c = cuts[pe];
          c.push_back(0);
          std::size_t s = 0;
          for (std::uint64_t b : bounds[g]) {
            if (b == 0) {
              c.push_back(0);
            } else if (b == n) {
              c.push_back(data[pe].size());
            } else {
              while (sel[g][s].rank < b) ++s;
              c.push_back(sel[g][s].splits[i]);
            }
          }
          c.push_back(data[pe].size());
        }
      }
    }

    Pieces pieces(p);
    machine.for_each_pe(parent, [&](int pe) {
      pieces[pe].resize(r);
      for (int t = 0; t < r; ++t) {
        pieces[pe][t].assign(data[pe].begin() + static_cast<std::ptrdiff_t>(cuts[pe][t]),
                             data[pe].begin() + static_cast<std::ptrdiff_t>(cuts[pe][t + 1]));
      }
      data[pe].clear();
    });

    DeliveryResult delivered;
    {
      PhaseScope scope(ledger, level, Phase::DataDelivery);
      DeliveryOptions opt{options.scheme, options.seed.sub("deliver/" + tag),
                          options.delegation_factor, 0};
      if (level == 1 && options.scheme == Scheme::Deterministic) {
        // Inputs need not be balanced; later levels are.
        opt.max_piece = input_max;
      }
      delivered = deliver(machine, parent, r, std::move(pieces), opt);
    }
    {
      PhaseScope scope(ledger, level, Phase::LocalSorting);
      machine.for_each_pe(parent, [&](int pe) {
        data[pe] = merge_runs(delivered.runs[pe]);
        delivered.runs[pe].clear();
      });
    }
    group_size /= r;
    result.levels.push_back(measure_loads(data, level, p / group_size));
  }
  result.data = std::move(data);
  return result;
}

}  // namespace mlsort
