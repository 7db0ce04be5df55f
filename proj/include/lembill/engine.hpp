#pragma once

// One computing party's gate evaluator. Linear operations are local; each
// interactive operation is one batched synchronous step against the other
// two computing parties, and increments the party's round counter for the
// phase it runs under.
//
// Rep3 multiplication re-randomises with pseudo-random zero sharing so each
// party sends exactly one ring element per multiplication. The Additive
// backend multiplies with Beaver triples, opening the usual masked
// differences. Comparisons follow the mask-and-open approach: open u = v + r
// against a preprocessed mask, then evaluate a fixed-shape binary circuit
// between the public bits of u and the shared bits of r. The circuit shape
// is the same for every input, so the communication pattern carries no
// information about v.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "lembill/rng.hpp"
#include "lembill/shares.hpp"
#include "lembill/transport.hpp"

namespace lembill {

enum class OpenTag : uint8_t {
  ZoneTuple,      // phase-3 zone aggregates, public by protocol design
  MaskedCompare,  // u = v + r and daBit-masked bit openings
  BeaverMask,     // d = x - a, e = y - b inside Additive multiplication
  Deviation,      // individual deviations, reveal-deviations mode only
};

const char* open_tag_name(OpenTag t);

struct OpenEvent {
  uint8_t phase;
  OpenTag tag;
  uint32_t count;
};

struct SignBits {
  std::vector<BitShare> gt;  // reconstructs to 1 iff signed(v) > 0
  std::vector<BitShare> lt;  // reconstructs to 1 iff signed(v) < 0
};

// Number of shared-AND gates one sign comparison consumes.
uint32_t comparison_and_count();

class PartyEngine {
 public:
  PartyEngine(int party, Backend backend, Endpoint& ep, PreprocessingStore store)
      : party_(party), backend_(backend), ep_(ep), store_(std::move(store)) {
    init_zero_sharing();
  }

  int party() const { return party_; }
  Backend backend() const { return backend_; }
  void set_phase(uint8_t p) { phase_ = p; }
  uint8_t phase() const { return phase_; }

  // ---- local operations ----
  ArithShare add(const ArithShare& a, const ArithShare& b) const {
    return {{a.c[0] + b.c[0], a.c[1] + b.c[1]}};
  }
  ArithShare sub(const ArithShare& a, const ArithShare& b) const {
    return {{a.c[0] - b.c[0], a.c[1] - b.c[1]}};
  }
  ArithShare neg(const ArithShare& a) const { return {{~a.c[0] + 1, ~a.c[1] + 1}}; }
  ArithShare mul_public(const ArithShare& a, uint64_t k) const {
    return {{a.c[0] * k, a.c[1] * k}};
  }
  ArithShare add_public(const ArithShare& a, uint64_t k) const;
  ArithShare public_share(uint64_t v) const { return public_arith_share(backend_, party_, v); }

  BitShare bxor(const BitShare& a, const BitShare& b) const {
    return {{static_cast<uint8_t>(a.c[0] ^ b.c[0]), static_cast<uint8_t>(a.c[1] ^ b.c[1])}};
  }
  BitShare bxor_public(const BitShare& a, uint8_t bit) const;
  BitShare bnot(const BitShare& a) const { return bxor_public(a, 1); }
  BitShare public_bit(uint8_t v) const { return public_bit_share(backend_, party_, v); }

  // ---- interactive operations (one round each unless noted) ----
  std::vector<ArithShare> mul(std::span<const ArithShare> xs, std::span<const ArithShare> ys);
  std::vector<BitShare> band(std::span<const BitShare> xs, std::span<const BitShare> ys);

  std::vector<uint64_t> open(std::span<const ArithShare> shares, OpenTag tag);
  std::vector<uint8_t> open_bits(std::span<const BitShare> shares, OpenTag tag);
  // open + an echo round; raises OpenDisagreement if the parties do not
  // reconstruct identical values.
  std::vector<uint64_t> open_checked(std::span<const ArithShare> shares, OpenTag tag);

  // Fixed-shape oblivious sign test of a batch of shared values; consumes
  // one ComparisonMask per value. One masked opening, six suffix-AND
  // levels, one product level and one combine level, whatever the inputs.
  SignBits compare_sign(std::span<const ArithShare> vs);

  // Binary-to-arithmetic conversion of bit shares; one daBit and a shared
  // masked opening per bit.
  std::vector<ArithShare> bit_to_arith(std::span<const BitShare> bits);

  // ---- accounting ----
  uint64_t rounds(uint8_t phase) const {
    auto it = rounds_by_phase_.find(phase);
    return it == rounds_by_phase_.end() ? 0 : it->second;
  }
  const std::map<uint8_t, uint64_t>& rounds_by_phase() const { return rounds_by_phase_; }
  const std::vector<OpenEvent>& open_log() const { return open_log_; }
  PreprocessingStore& store() { return store_; }

 private:
  void init_zero_sharing();
  void bump_round() { rounds_by_phase_[phase_] += 1; }

  Role peer(int idx) const { return computing_party(idx); }
  void send_peer(int idx, std::span<const uint8_t> payload) { ep_.send(peer(idx), phase_, payload); }
  WireMessage recv_peer(int idx) { return ep_.recv(peer(idx)); }

  std::vector<ArithShare> mul_rep3(std::span<const ArithShare> xs, std::span<const ArithShare> ys);
  std::vector<ArithShare> mul_additive(std::span<const ArithShare> xs,
                                       std::span<const ArithShare> ys);
  std::vector<BitShare> band_rep3(std::span<const BitShare> xs, std::span<const BitShare> ys);
  std::vector<BitShare> band_additive(std::span<const BitShare> xs, std::span<const BitShare> ys);

  int party_;
  Backend backend_;
  Endpoint& ep_;
  PreprocessingStore store_;
  uint8_t phase_ = 0;

  PrfStream zero_own_, zero_next_;          // arithmetic zero sharing
  PrfStream zero_bin_own_, zero_bin_next_;  // binary zero sharing

  std::map<uint8_t, uint64_t> rounds_by_phase_;
  std::vector<OpenEvent> open_log_;
};

}  // namespace lembill
