#pragma once

#include <array>
#include <cstdint>
#include <functional>

#include "mlsort/random.hpp"

namespace mlsort {

// Pseudorandom permutation of 0..n-1 with O(1) state.
//
// An index i < side^2 is viewed as the digit pair (lo, hi) with
// i = lo + hi * side. One Feistel round maps (lo, hi) to
// (hi, (lo + f(hi)) mod side); four rounds with independently keyed f are
// chained. Domains that are not perfect squares are handled by cycle-walking:
// the padded permutation is re-applied until the value falls below n.
class FeistelPermutation {
 public:
  static constexpr int kRounds = 4;

  // Round function override: (round, hi digit) -> arbitrary value, reduced
  // mod side by the permutation. Used to pin degenerate cases in tests.
  using RoundFunction = std::function<std::uint64_t(int, std::uint64_t)>;

  FeistelPermutation(std::uint64_t n, const SeedSpec& seed);
  FeistelPermutation(std::uint64_t n, RoundFunction round_fn);

  std::uint64_t domain_size() const { return n_; }
  std::uint64_t side() const { return side_; }
  const std::array<std::uint64_t, kRounds>& round_keys() const {
    return keys_;
  }

  // pi(i); throws PreconditionError for i >= domain_size().
  std::uint64_t apply(std::uint64_t i) const;

  // Number of padded-permutation applications apply(i) needs.
  std::uint64_t walk_length(std::uint64_t i) const;

 private:
  std::uint64_t round_value(int round, std::uint64_t hi) const;
  std::uint64_t permute_padded(std::uint64_t x) const;

  std::uint64_t n_;
  std::uint64_t side_;
  std::array<std::uint64_t, kRounds> keys_{};
  RoundFunction override_;
};

// Smallest s with s*s >= n.
std::uint64_t ceil_sqrt(std::uint64_t n);

}  // namespace mlsort
