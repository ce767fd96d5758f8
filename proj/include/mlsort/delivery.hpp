#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "mlsort/element.hpp"
#include "mlsort/random.hpp"
#include "mlsort/simnet.hpp"

namespace mlsort {

enum class Scheme { Simple, Permuted, Deterministic, Randomized };

std::string_view scheme_name(Scheme scheme);
// Accepts the names returned by scheme_name; ConfigError otherwise.
Scheme parse_scheme(std::string_view name);

// pieces[pe][j] is the data PE pe sends to subgroup j of its parent group.
using Pieces = std::vector<std::vector<std::vector<Element>>>;

// Part of a piece bound for one PE. Offsets are positions within the piece;
// element numbers are 0-based positions within the subgroup's data.
struct Slice {
  int dest = 0;
  std::size_t offset = 0;
  std::size_t length = 0;
  std::uint64_t first_number = 0;
  bool operator==(const Slice&) const = default;
};

struct DeliveryPlan {
  std::vector<std::vector<std::vector<Slice>>> slices;  // [pe][subgroup]
  std::vector<std::vector<std::uint64_t>> totals;       // [parent group][subgroup]
  bool operator==(const DeliveryPlan&) const = default;
};

struct DeliveryOptions {
  Scheme scheme = Scheme::Deterministic;
  SeedSpec seed;
  // Randomized delegation factor; 0 picks default_delegation_factor.
  double delegation_factor = 0.0;
  // Largest piece the deterministic scheme accepts; 0 means ceil(n/P) with
  // n and P the parent group's element and PE count.
  std::size_t max_piece = 0;
};

struct DeliveryResult {
  DeliveryPlan plan;
  // Received slices per PE, ordered by sender and then by slice.
  std::vector<std::vector<std::vector<Element>>> runs;
  // Deterministic scheme: elements each PE receives as whole small pieces.
  std::vector<std::uint64_t> small_load;
  // Randomized scheme: number of delegated parts per parent group.
  std::vector<std::uint64_t> delegated;
};

// max(1, floor((sqrt(1 + r / ln(r P / 2)) - 1) / 2)); 1 when the logarithm
// is not positive.
double default_delegation_factor(int r, int group_size);

// Member t (0-based) of a subgroup holding m elements on q PEs receives the
// element numbers [boundary(t), boundary(t + 1)).
std::uint64_t receiver_boundary(std::uint64_t m, int q, int t);

// Moves every piece to its subgroup so that subgroup j's members receive its
// elements by element number, perfectly balanced. Each parent group of
// `parent` splits into r contiguous subgroups of equal size.
DeliveryResult deliver(Machine& machine, const Layout& parent, int r,
                       Pieces pieces, const DeliveryOptions& options);

}  // namespace mlsort
