#pragma once

#include <cstdint>
#include <random>

namespace lembill {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derive an independent engine from a master seed and a purpose tag, so the
// dealer, the generator and each protocol role draw from disjoint streams.
inline std::mt19937_64 seeded_engine(uint64_t seed, uint64_t tag) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ tag));
}

// Pairwise correlated randomness stream. Two parties holding the same key
// and consuming in the same order see the same values.
class PrfStream {
 public:
  PrfStream() = default;
  explicit PrfStream(uint64_t key) : key_(key) {}

  uint64_t next() { return splitmix64(key_ ^ (0xa0761d6478bd642fULL * ++counter_)); }
  uint8_t next_bit() { return static_cast<uint8_t>(next() & 1); }

 private:
  uint64_t key_ = 0;
  uint64_t counter_ = 0;
};

}  // namespace lembill
