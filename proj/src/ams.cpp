#include "mlsort/ams.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "mlsort/errors.hpp"
#include "mlsort/fastsort.hpp"
#include "mlsort/rlm.hpp"

namespace mlsort {

void validate_ams_params(const AmsParams& params, int p) {
  if (params.levels < 1) throw ConfigError("levels must be at least 1");
  if (params.b < 1) throw ConfigError("overpartitioning factor b must be >= 1");
  if (!(params.a >= 0) || !std::isfinite(params.a)) {
    throw ConfigError("oversampling factor a must be positive (0 selects the default)");
  }
  if (!(params.epsilon > 0) || !std::isfinite(params.epsilon)) {
    throw ConfigError("imbalance epsilon must be positive");
  }
  if (params.delegation_factor < 0) {
    throw ConfigError("delegation factor must be positive");
  }
  if (!params.groups.empty()) {
    if (static_cast<int>(params.groups.size()) != params.levels) {
      throw ConfigError("group counts given for " +
                        std::to_string(params.groups.size()) + " levels, k = " +
                        std::to_string(params.levels));
    }
    validate_level_plan({params.groups}, p);
  }
}

double default_oversampling(std::uint64_t n) {
  return std::max(1.0, 1.6 * std::log10(static_cast<double>(std::max<std::uint64_t>(n, 1))));
}

double level_epsilon(double epsilon, int levels) {
  return std::pow(1.0 + epsilon, 1.0 / levels) - 1.0;
}

namespace {

using u128 = unsigned __int128;

struct Scan {
  bool ok = false;
  GroupPlan plan;
  // Every bound below this value repeats the same greedy decisions.
  std::uint64_t min_z = std::numeric_limits<std::uint64_t>::max();
};

Scan scan(std::span<const std::uint64_t> hist, int r, std::uint64_t L) {
  Scan s;
  auto& plan = s.plan;
  plan.boundaries.push_back(0);
  std::uint64_t load = 0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const std::uint64_t x = hist[i];
    if (x > L) {
      s.min_z = std::min(s.min_z, x);
      return s;
    }
    if (load + x > L) {
      s.min_z = std::min(s.min_z, load + x);
      if (static_cast<int>(plan.group_load.size()) + 1 == r) return s;
      plan.group_load.push_back(load);
      plan.boundaries.push_back(i);
      load = 0;
    }
    load += x;
  }
  plan.group_load.push_back(load);
  plan.boundaries.push_back(hist.size());
  while (static_cast<int>(plan.group_load.size()) < r) {
    plan.group_load.push_back(0);
    plan.boundaries.push_back(hist.size());
  }
  plan.L = *std::max_element(plan.group_load.begin(), plan.group_load.end());
  s.ok = true;
  return s;
}

}  // namespace

std::optional<GroupPlan> scan_groups(std::span<const std::uint64_t> hist, int r,
                                     std::uint64_t L) {
  if (r < 1) throw PreconditionError("need at least one group");
  auto s = scan(hist, r, L);
  if (!s.ok) return std::nullopt;
  return std::move(s.plan);
}

GroupPlan optimal_group_plan(std::span<const std::uint64_t> hist, int r) {
  if (r < 1) throw PreconditionError("need at least one group");
  std::uint64_t n = 0, biggest = 0;
  for (auto x : hist) {
    n += x;
    biggest = std::max(biggest, x);
  }
  const std::uint64_t nb = std::max<std::size_t>(hist.size(), 1);
  const std::uint64_t share = (n + r - 1) / r;
  std::uint64_t lo = std::max(biggest, share);

  // The optimum is the load of some range of consecutive buckets and lies
  // near n/r; try those range sums first.
  const std::uint64_t window = share + 4 * ((n + nb - 1) / nb);
  std::vector<std::uint64_t> cand;
  for (std::size_t s = 0; s < hist.size(); ++s) {
    std::uint64_t sum = 0;
    for (std::size_t e = s; e < hist.size(); ++e) {
      sum += hist[e];
      if (sum > window) break;
      if (sum >= lo) cand.push_back(sum);
    }
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  std::size_t first = 0, last = cand.size();
  while (first < last) {
    const std::size_t mid = first + (last - first) / 2;
    if (scan(hist, r, cand[mid]).ok) {
      last = mid;
    } else {
      first = mid + 1;
    }
  }
  if (first < cand.size()) return scan(hist, r, cand[first]).plan;

  // Binary search on L, snapping to loads the scan actually produced.
  lo = std::max(lo, window + 1);
  std::uint64_t hi = std::max(n, lo);
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    const Scan s = scan(hist, r, mid);
    if (s.ok) {
      hi = s.plan.L;
    } else {
      lo = std::max(mid + 1, s.min_z);
    }
  }
  return scan(hist, r, hi).plan;
}

std::vector<std::vector<Element>> draw_sample(
    Machine& machine, const Layout& layout,
    const std::vector<std::vector<Element>>& data,
    const std::vector<std::uint64_t>& count, const SeedSpec& seed) {
  const int p = machine.size();
  std::vector<std::vector<std::uint64_t>> sizes(p);
  for (int pe = layout.first; pe < layout.first + layout.pes(); ++pe) {
    sizes[pe] = {data[pe].size()};
  }
  const auto prefix = machine.prefix_sum_vec(layout, sizes);
  for (int g = 0; g < layout.groups(); ++g) {
    if (count[g] > prefix.totals[g][0]) {
      throw PreconditionError("sample of " + std::to_string(count[g]) +
                              " exceeds the " +
                              std::to_string(prefix.totals[g][0]) +
                              " elements of group " + std::to_string(g));
    }
  }
  std::vector<std::vector<Element>> sample(p);
  machine.for_each_pe(layout, [&](int pe) {
    const int g = layout.group_of(pe);
    const std::uint64_t n = prefix.totals[g][0];
    if (n == 0) return;
    const std::uint64_t c = count[g];
    const std::uint64_t before = prefix.exclusive[pe][0];
    const std::uint64_t size = data[pe].size();
    const auto quota = static_cast<std::uint64_t>(
        static_cast<u128>(c) * (before + size) / n - static_cast<u128>(c) * before / n);
    // Floyd's algorithm: quota distinct positions out of size.
    Rng rng(seed.sub("pe" + std::to_string(pe)));
    std::set<std::uint64_t> picked;
    for (std::uint64_t j = size - quota; j < size; ++j) {
      const std::uint64_t t = rng.below(j + 1);
      if (!picked.insert(t).second) picked.insert(j);
    }
    for (auto i : picked) sample[pe].push_back(data[pe][i]);
  });
  return sample;
}

std::vector<std::vector<Element>> select_splitters(
    Machine& machine, const Layout& layout,
    const std::vector<std::vector<Element>>& sample,
    const std::vector<int>& buckets) {
  std::vector<std::vector<std::uint64_t>> ranks(layout.groups());
  for (int g = 0; g < layout.groups(); ++g) {
    const PeGroup grp = layout.group(g);
    std::uint64_t s = 0;
    for (int i = 0; i < grp.size; ++i) s += sample[grp.member(i)].size();
    const int nb = buckets[g];
    if (nb < 1 || s + 1 < static_cast<std::uint64_t>(nb)) {
      throw PreconditionError("sample of " + std::to_string(s) +
                              " elements cannot define " + std::to_string(nb) +
                              " buckets");
    }
    for (int i = 1; i < nb; ++i) ranks[g].push_back(i * s / nb);
  }

  if (is_power_of_two(static_cast<std::uint64_t>(layout.group_size))) {
    const auto ranked = fast_rank_sort(machine, layout, sample);
    return extract_by_ranks(machine, layout, ranked, ranks);
  }
  // Other group sizes: gather the whole sample everywhere and pick.
  std::vector<std::vector<Element>> sorted(machine.size());
  machine.for_each_pe(layout, [&](int pe) {
    sorted[pe] = sample[pe];
    std::sort(sorted[pe].begin(), sorted[pe].end());
  });
  const auto merged = machine.gossip_merge(layout, sorted);
  std::vector<std::vector<Element>> out(layout.groups());
  for (int g = 0; g < layout.groups(); ++g) {
    for (auto r : ranks[g]) out[g].push_back(merged[g][r]);
  }
  return out;
}

std::vector<std::vector<Element>> partition_buckets(
    std::span<const Element> data, std::span<const Element> splitters) {
  for (std::size_t i = 1; i < splitters.size(); ++i) {
    if (!(splitters[i - 1] < splitters[i])) {
      throw PreconditionError("splitters must be strictly ascending");
    }
  }
  std::vector<std::uint32_t> id(data.size());
  std::vector<std::size_t> count(splitters.size() + 1, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    id[i] = static_cast<std::uint32_t>(
        std::lower_bound(splitters.begin(), splitters.end(), data[i]) -
        splitters.begin());
    ++count[id[i]];
  }
  std::vector<std::vector<Element>> out(count.size());
  for (std::size_t b = 0; b < count.size(); ++b) out[b].reserve(count[b]);
  for (std::size_t i = 0; i < data.size(); ++i) out[id[i]].push_back(data[i]);
  return out;
}

AmsLevelReport ams_level(Machine& machine, const Layout& parent, int r,
                         std::vector<std::vector<Element>>& data,
                         const AmsParams& params, double a, double eps_level,
                         int level) {
  const int p = machine.size();
  const int G = parent.groups();
  if (r < 1 || parent.group_size % r != 0) {
    throw PreconditionError("group of " + std::to_string(parent.group_size) +
                            " PEs cannot split into " + std::to_string(r));
  }
  CostLedger& ledger = machine.ledger();
  const std::string tag = "level" + std::to_string(level);
  AmsLevelReport report{level, r, 0, 0.0, false};

  std::vector<std::vector<std::uint64_t>> sizes(p);
  for (int pe = parent.first; pe < parent.first + parent.pes(); ++pe) {
    sizes[pe] = {data[pe].size()};
  }

  std::vector<std::uint64_t> n(G);
  std::vector<int> nb(G);
  std::vector<std::vector<Element>> splitters;
  {
    PhaseScope scope(ledger, level, Phase::SplitterSelection);
    const auto totals = machine.allreduce_vec(
        parent, sizes, [](std::uint64_t x, std::uint64_t y) { return x + y; });
    std::vector<std::uint64_t> count(G);
    const double wanted = std::ceil(a * params.b * r);
    for (int g = 0; g < G; ++g) {
      n[g] = totals[g][0];
      count[g] = std::min<std::uint64_t>(static_cast<std::uint64_t>(wanted), n[g]);
      nb[g] = static_cast<int>(std::min<std::uint64_t>(
          static_cast<std::uint64_t>(params.b) * r, count[g] + 1));
      report.buckets = std::max(report.buckets, nb[g]);
    }
    const auto sample =
        draw_sample(machine, parent, data, count, params.seed.sub("sample/" + tag));
    splitters = select_splitters(machine, parent, sample, nb);
  }

  Pieces pieces(p);
  {
    PhaseScope scope(ledger, level, Phase::BucketProcessing);
    std::vector<std::vector<std::vector<Element>>> buckets(p);
    std::vector<std::vector<std::uint64_t>> local_hist(p);
    machine.for_each_pe(parent, [&](int pe) {
      buckets[pe] = partition_buckets(data[pe], splitters[parent.group_of(pe)]);
      for (const auto& bucket : buckets[pe]) local_hist[pe].push_back(bucket.size());
      data[pe].clear();
    });
    const auto hist = machine.allreduce_vec(
        parent, local_hist, [](std::uint64_t x, std::uint64_t y) { return x + y; });
    std::vector<GroupPlan> plans(G);
    parallel_for(machine.exec(), static_cast<std::size_t>(G), [&](std::size_t g) {
      plans[g] = optimal_group_plan(hist[g], r);
    });
    for (int g = 0; g < G; ++g) {
      if (n[g] == 0) continue;
      const double ratio = static_cast<double>(plans[g].L) * r / static_cast<double>(n[g]);
      report.plan_imbalance = std::max(report.plan_imbalance, ratio);
      report.imbalance_warning |= ratio > 1.0 + eps_level;
    }
    machine.for_each_pe(parent, [&](int pe) {
      const GroupPlan& plan = plans[parent.group_of(pe)];
      pieces[pe].resize(r);
      for (int j = 0; j < r; ++j) {
        auto& piece = pieces[pe][j];
        for (std::size_t b = plan.boundaries[j]; b < plan.boundaries[j + 1]; ++b) {
          piece.insert(piece.end(), buckets[pe][b].begin(), buckets[pe][b].end());
        }
      }
    });
  }

  {
    PhaseScope scope(ledger, level, Phase::DataDelivery);
    DeliveryOptions opt{params.scheme, params.seed.sub("deliver/" + tag),
                        params.delegation_factor, 0};
    if (params.scheme == Scheme::Deterministic) {
      const auto most = machine.allreduce_vec(
          parent, sizes, [](std::uint64_t x, std::uint64_t y) { return std::max(x, y); });
      std::uint64_t bound = 1;
      for (const auto& v : most) bound = std::max(bound, v[0]);
      opt.max_piece = bound;
    }
    auto delivered = deliver(machine, parent, r, std::move(pieces), opt);
    machine.for_each_pe(parent, [&](int pe) {
      for (auto& run : delivered.runs[pe]) {
        data[pe].insert(data[pe].end(), run.begin(), run.end());
      }
      delivered.runs[pe].clear();
    });
  }
  return report;
}

AmsResult ams_sort(Machine& machine, std::vector<std::vector<Element>> data,
                   const AmsParams& params) {
  const int p = machine.size();
  validate_ams_params(params, p);
  const LevelPlan plan = params.groups.empty()
                             ? make_level_plan(p, params.levels)
                             : LevelPlan{params.groups};
  data.resize(p);
  AmsResult result;

  double a = params.a;
  if (a == 0.0) {
    PhaseScope scope(machine.ledger(), 1, Phase::SplitterSelection);
    std::vector<std::vector<std::uint64_t>> sizes(p);
    for (int pe = 0; pe < p; ++pe) sizes[pe] = {data[pe].size()};
    const auto n = machine.allreduce_vec(
        machine.all(), sizes, [](std::uint64_t x, std::uint64_t y) { return x + y; });
    a = default_oversampling(n[0][0]);
  }
  result.a = a;
  const double eps_level = level_epsilon(params.epsilon, plan.levels());

  int group_size = p;
  for (int level = 1; level <= plan.levels(); ++level) {
    const int r = plan.r[level - 1];
    const Layout parent{0, group_size, p / group_size};
    result.reports.push_back(
        ams_level(machine, parent, r, data, params, a, eps_level, level));
    group_size /= r;
    result.sort.levels.push_back(measure_loads(data, level, p / group_size));
  }
  {
    PhaseScope scope(machine.ledger(), plan.levels(), Phase::LocalSorting);
    machine.for_each_pe(machine.all(), [&](int pe) {
      std::sort(data[pe].begin(), data[pe].end());
    });
  }
  result.sort.data = std::move(data);
  return result;
}

}  // namespace mlsort
