#pragma once

// Secret-sharing schemes over Z_{2^64} and Z_2 for three computing parties.
//
//   Rep3     replicated sharing: x = x_0 + x_1 + x_2, party i holds
//            (x_i, x_{i+1}); any single party's view is independent of x
//            and any two parties can reconstruct. Honest-majority setting.
//   Additive each party holds one addend x_i; any two parties' components
//            are still independent of x. Dishonest-majority setting.
//
// Binary shares use the same layouts with XOR in place of addition.

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "lembill/errors.hpp"
#include "lembill/ring.hpp"

namespace lembill {

enum class Backend : uint8_t {
  Rep3,      // honest-majority passive, replicated three-party sharing
  Additive,  // dishonest-majority passive, additive sharing + Beaver triples
};

const char* backend_name(Backend b);

inline int next_party(int i) { return (i + 1) % 3; }
inline int prev_party(int i) { return (i + 2) % 3; }

// One party's share of a ring element. Rep3 uses both components,
// Additive only c[0].
struct ArithShare {
  std::array<uint64_t, 2> c{0, 0};
};

// One party's share of a bit (values 0/1).
struct BitShare {
  std::array<uint8_t, 2> c{0, 0};
};

// ---- dealing and reconstruction (dealer / output-party / test side) ----

std::array<ArithShare, 3> share_arith(Backend b, uint64_t secret, std::mt19937_64& rng);
std::array<BitShare, 3> share_bit(Backend b, uint8_t secret, std::mt19937_64& rng);

uint64_t reconstruct_arith(Backend b, std::span<const ArithShare> shares);
uint8_t reconstruct_bit(Backend b, std::span<const BitShare> shares);

// Consistency check on the redundant Rep3 components; Additive shares have
// no redundancy and always pass.
bool shares_consistent(Backend b, std::span<const ArithShare> shares);

// Share of a public constant every party can form without communication.
ArithShare public_arith_share(Backend b, int party, uint64_t value);
BitShare public_bit_share(Backend b, int party, uint8_t value);

// ---- preprocessed correlated randomness ----

struct BeaverTriple {
  ArithShare a, b, c;  // c reconstructs to a*b
};

struct BitTriple {
  BitShare a, b, c;  // c reconstructs to a AND b
};

// Shares of a random r together with binary shares of each bit of r,
// consumed by one masked comparison.
struct ComparisonMask {
  ArithShare r;
  std::array<BitShare, 64> r_bits;
};

// A random bit shared in both domains, consumed by one bit conversion.
struct DaBit {
  BitShare binary;
  ArithShare arith;
};

// Everything one party needs from the offline phase. Stores are consumed
// front to back; running past the end raises TripleExhausted/MaskExhausted.
struct PreprocessingStore {
  Backend backend = Backend::Rep3;

  // Rep3 pseudo-random zero sharing keys: party i holds (k_i, k_{i+1}).
  std::array<uint64_t, 2> zero_keys{0, 0};
  std::array<uint64_t, 2> zero_keys_bin{0, 0};

  std::vector<BeaverTriple> triples;     // Additive only
  std::vector<BitTriple> bit_triples;    // Additive only
  std::vector<ComparisonMask> masks;
  std::vector<DaBit> dabits;

  size_t next_triple = 0;
  size_t next_bit_triple = 0;
  size_t next_mask = 0;
  size_t next_dabit = 0;

  const BeaverTriple& take_triple();
  const BitTriple& take_bit_triple();
  const ComparisonMask& take_mask();
  const DaBit& take_dabit();
};

// How much preprocessing a session consumes, per party.
struct PreprocessingBudget {
  uint64_t triples = 0;
  uint64_t bit_triples = 0;
  uint64_t masks = 0;
  uint64_t dabits = 0;
};

// Trusted-dealer offline phase: deterministic under seed. The cryptographic
// generation of this material (OT-based preprocessing) is out of scope; the
// dealer reproduces exactly the correlated randomness the online phase needs.
std::array<PreprocessingStore, 3> deal_preprocessing(Backend b, const PreprocessingBudget& budget,
                                                     uint64_t seed);

}  // namespace lembill
