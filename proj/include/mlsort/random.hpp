#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>

namespace mlsort {

// 64-bit avalanche finalizer (splitmix64 / Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Names one independent random stream under a master seed. Equal specs give
// equal streams; distinct stream ids give unrelated ones.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::string stream_id;

  SeedSpec() = default;
  SeedSpec(std::uint64_t seed, std::string stream)
      : master_seed(seed), stream_id(std::move(stream)) {}

  // Child stream, e.g. spec.sub("pe3").
  SeedSpec sub(const std::string& suffix) const {
    return {master_seed, stream_id + "/" + suffix};
  }

  std::uint64_t derive() const;
};

// Deterministic generator. Bounded draws are done here rather than through
// std::uniform_int_distribution, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(const SeedSpec& spec) : engine_(spec.derive()) {}
  explicit Rng(std::uint64_t raw_seed) : engine_(raw_seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  // Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mlsort
