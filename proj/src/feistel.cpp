#include "mlsort/feistel.hpp"

#include <cmath>
#include <string>

#include "mlsort/errors.hpp"

namespace mlsort {

std::uint64_t ceil_sqrt(std::uint64_t n) {
  auto s = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (s * s < n) ++s;
  while (s > 0 && (s - 1) * (s - 1) >= n) --s;
  return s;
}

FeistelPermutation::FeistelPermutation(std::uint64_t n, const SeedSpec& seed)
    : n_(n), side_(ceil_sqrt(n)) {
  if (n == 0) throw PreconditionError("permutation domain must be non-empty");
  Rng rng(seed);
  for (auto& k : keys_) k = rng.next();
}

FeistelPermutation::FeistelPermutation(std::uint64_t n, RoundFunction round_fn)
    : n_(n), side_(ceil_sqrt(n)), override_(std::move(round_fn)) {
  if (n == 0) throw PreconditionError("permutation domain must be non-empty");
}

std::uint64_t FeistelPermutation::round_value(int round,
                                              std::uint64_t hi) const {
  const std::uint64_t v =
      override_ ? override_(round, hi) : mix64(hi ^ keys_[round]);
  return v % side_;
}

std::uint64_t FeistelPermutation::permute_padded(std::uint64_t x) const {
  std::uint64_t lo = x % side_;
  std::uint64_t hi = x / side_;
  for (int round = 0; round < kRounds; ++round) {
    const std::uint64_t next_hi = (lo + round_value(round, hi)) % side_;
    lo = hi;
    hi = next_hi;
  }
  return lo + hi * side_;
}

std::uint64_t FeistelPermutation::apply(std::uint64_t i) const {
  if (i >= n_) {
    throw PreconditionError("index " + std::to_string(i) +
                            " outside permutation domain " +
                            std::to_string(n_));
  }
  const std::uint64_t cap = side_ * side_;
  std::uint64_t x = i;
  for (std::uint64_t step = 0; step < cap; ++step) {
    x = permute_padded(x);
    if (x < n_) return x;
  }
  throw InvariantError("cycle walk did not terminate");
}

std::uint64_t FeistelPermutation::walk_length(std::uint64_t i) const {
  if (i >= n_) throw PreconditionError("index outside permutation domain");
  std::uint64_t x = i;
  std::uint64_t steps = 0;
  do {
    x = permute_padded(x);
    ++steps;
  } while (x >= n_);
  return steps;
}

}  // namespace mlsort
