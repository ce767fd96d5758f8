#pragma once

#include <vector>

#include "mlsort/delivery.hpp"
#include "mlsort/simnet.hpp"
#include "mlsort/sorter.hpp"

namespace mlsort {

// Group counts per level; their product is p.
struct LevelPlan {
  std::vector<int> r;
  int levels() const { return static_cast<int>(r.size()); }
  bool operator==(const LevelPlan&) const = default;
};

// k levels whose group counts are divisors of p close to p^(1/k); each
// level takes the divisor of what remains nearest to the even share.
LevelPlan make_level_plan(int p, int k);

// ConfigError unless every r is positive and the product equals p.
void validate_level_plan(const LevelPlan& plan, int p);

// Merges sorted runs with a loser tree.
std::vector<Element> merge_runs(const std::vector<std::vector<Element>>& runs);

struct RlmOptions {
  LevelPlan plan;
  Scheme scheme = Scheme::Deterministic;
  SeedSpec seed;
  double delegation_factor = 0.0;  // randomized delivery; 0 picks the default
};

// Recurse-last multiway mergesort. data[pe] is PE pe's input; the result
// holds floor(n/p) or ceil(n/p) elements per PE.
SortResult rlm_sort(Machine& machine, std::vector<std::vector<Element>> data,
                    const RlmOptions& options);

}  // namespace mlsort
