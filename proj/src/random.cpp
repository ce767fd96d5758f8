#include "mlsort/random.hpp"

namespace mlsort {

std::uint64_t SeedSpec::derive() const {
  // FNV-1a over the stream label, then mixed with the master seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stream_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(mix64(master_seed) ^ h);
}

}  // namespace mlsort
