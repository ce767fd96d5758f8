#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mlsort/delivery.hpp"
#include "mlsort/simnet.hpp"
#include "mlsort/sorter.hpp"

namespace mlsort {

struct AmsParams {
  int levels = 1;           // k
  std::vector<int> groups;  // r per level; empty picks make_level_plan(p, k)
  double a = 0.0;           // oversampling factor; 0 picks 1.6 log10(n)
  int b = 16;               // overpartitioning factor
  double epsilon = 0.25;    // target imbalance
  Scheme scheme = Scheme::Deterministic;
  SeedSpec seed;
  double delegation_factor = 0.0;  // randomized delivery; 0 picks the default
};

// ConfigError on invalid parameters.
void validate_ams_params(const AmsParams& params, int p);

// max(1, 1.6 log10(n)).
double default_oversampling(std::uint64_t n);

// (1 + eps)^(1/k) - 1.
double level_epsilon(double epsilon, int levels);

// Consecutive bucket ranges assigned to groups: group i gets buckets
// [boundaries[i], boundaries[i + 1]).
struct GroupPlan {
  std::vector<std::size_t> boundaries;  // r + 1 entries
  std::uint64_t L = 0;                  // largest group load
  std::vector<std::uint64_t> group_load;
  bool operator==(const GroupPlan&) const = default;
};

// Greedy left-to-right packing with load bound L; empty when more than r
// groups would be needed.
std::optional<GroupPlan> scan_groups(std::span<const std::uint64_t> hist, int r,
                                     std::uint64_t L);

// Plan with the smallest possible largest group load.
GroupPlan optimal_group_plan(std::span<const std::uint64_t> hist, int r);

// count[g] random elements of every group g, spread over its members in
// proportion to their data (counts of equal-size members differ by at most
// one). Result is per PE.
std::vector<std::vector<Element>> draw_sample(
    Machine& machine, const Layout& layout,
    const std::vector<std::vector<Element>>& data,
    const std::vector<std::uint64_t>& count, const SeedSpec& seed);

// buckets[g] - 1 splitters of equidistant rank in group g's sample,
// replicated on all members; one list per group.
std::vector<std::vector<Element>> select_splitters(
    Machine& machine, const Layout& layout,
    const std::vector<std::vector<Element>>& sample,
    const std::vector<int>& buckets);

// Stable split of data into splitters.size() + 1 buckets; an element goes to
// the bucket numbered by how many splitters are smaller than it.
std::vector<std::vector<Element>> partition_buckets(
    std::span<const Element> data, std::span<const Element> splitters);

struct AmsLevelReport {
  int level = 0;
  int r = 0;
  int buckets = 0;
  double plan_imbalance = 0.0;  // max over groups of L * r / n_g
  bool imbalance_warning = false;
};

// One level: every parent group of `parent` sorts its data into r subgroups
// by sampling, splitting and bucket grouping, then delivers it. data is
// replaced by the (unsorted) received elements.
AmsLevelReport ams_level(Machine& machine, const Layout& parent, int r,
                         std::vector<std::vector<Element>>& data,
                         const AmsParams& params, double a, double eps_level,
                         int level);

struct AmsResult {
  SortResult sort;
  std::vector<AmsLevelReport> reports;
  double a = 0.0;  // oversampling factor used
};

AmsResult ams_sort(Machine& machine, std::vector<std::vector<Element>> data,
                   const AmsParams& params);

}  // namespace mlsort
