#include "lembill/shares.hpp"

#include "lembill/rng.hpp"

namespace lembill {

const char* backend_name(Backend b) {
  return b == Backend::Rep3 ? "rep3" : "additive";
}

std::array<ArithShare, 3> share_arith(Backend b, uint64_t secret, std::mt19937_64& rng) {
  uint64_t x0 = rng();
  uint64_t x1 = rng();
  uint64_t x2 = secret - x0 - x1;
  std::array<ArithShare, 3> out{};
  if (b == Backend::Rep3) {
    out[0].c = {x0, x1};
    out[1].c = {x1, x2};
    out[2].c = {x2, x0};
  } else {
    out[0].c[0] = x0;
    out[1].c[0] = x1;
    out[2].c[0] = x2;
  }
  return out;
}

std::array<BitShare, 3> share_bit(Backend b, uint8_t secret, std::mt19937_64& rng) {
  uint8_t x0 = static_cast<uint8_t>(rng() & 1);
  uint8_t x1 = static_cast<uint8_t>(rng() & 1);
  uint8_t x2 = static_cast<uint8_t>((secret & 1) ^ x0 ^ x1);
  std::array<BitShare, 3> out{};
  if (b == Backend::Rep3) {
    out[0].c = {x0, x1};
    out[1].c = {x1, x2};
    out[2].c = {x2, x0};
  } else {
    out[0].c[0] = x0;
    out[1].c[0] = x1;
    out[2].c[0] = x2;
  }
  return out;
}

uint64_t reconstruct_arith(Backend b, std::span<const ArithShare> shares) {
  if (b == Backend::Rep3) {
    // Any two parties suffice; with fewer no reconstruction is possible.
    if (shares.size() < 2) raise(Errc::MissingContribution, "rep3 needs two of three parties");
    if (shares.size() >= 3) return shares[0].c[0] + shares[1].c[0] + shares[2].c[0];
    // Two consecutive parties i, i+1 hold (x_i, x_{i+1}), (x_{i+1}, x_{i+2}).
    return shares[0].c[0] + shares[1].c[0] + shares[1].c[1];
  }
  if (shares.size() < 3) raise(Errc::MissingContribution, "additive needs all three parties");
  return shares[0].c[0] + shares[1].c[0] + shares[2].c[0];
}

uint8_t reconstruct_bit(Backend b, std::span<const BitShare> shares) {
  if (b == Backend::Rep3) {
    if (shares.size() < 2) raise(Errc::MissingContribution, "rep3 needs two of three parties");
    if (shares.size() >= 3)
      return static_cast<uint8_t>((shares[0].c[0] ^ shares[1].c[0] ^ shares[2].c[0]) & 1);
    return static_cast<uint8_t>((shares[0].c[0] ^ shares[1].c[0] ^ shares[1].c[1]) & 1);
  }
  if (shares.size() < 3) raise(Errc::MissingContribution, "additive needs all three parties");
  return static_cast<uint8_t>((shares[0].c[0] ^ shares[1].c[0] ^ shares[2].c[0]) & 1);
}

bool shares_consistent(Backend b, std::span<const ArithShare> shares) {
  if (b != Backend::Rep3 || shares.size() < 3) return true;
  for (int i = 0; i < 3; ++i)
    if (shares[i].c[1] != shares[next_party(i)].c[0]) return false;
  return true;
}

ArithShare public_arith_share(Backend b, int party, uint64_t value) {
  // Component 0 of the sharing absorbs the constant; held by parties 0 and 2
  // under Rep3, by party 0 alone under Additive.
  ArithShare s{};
  if (b == Backend::Rep3) {
    if (party == 0) s.c[0] = value;
    if (party == 2) s.c[1] = value;
  } else if (party == 0) {
    s.c[0] = value;
  }
  return s;
}

BitShare public_bit_share(Backend b, int party, uint8_t value) {
  BitShare s{};
  value &= 1;
  if (b == Backend::Rep3) {
    if (party == 0) s.c[0] = value;
    if (party == 2) s.c[1] = value;
  } else if (party == 0) {
    s.c[0] = value;
  }
  return s;
}

const BeaverTriple& PreprocessingStore::take_triple() {
  if (next_triple >= triples.size()) raise(Errc::TripleExhausted, "arithmetic triples");
  return triples[next_triple++];
}

const BitTriple& PreprocessingStore::take_bit_triple() {
  if (next_bit_triple >= bit_triples.size()) raise(Errc::TripleExhausted, "binary triples");
  return bit_triples[next_bit_triple++];
}

const ComparisonMask& PreprocessingStore::take_mask() {
  if (next_mask >= masks.size()) raise(Errc::MaskExhausted, "comparison masks");
  return masks[next_mask++];
}

const DaBit& PreprocessingStore::take_dabit() {
  if (next_dabit >= dabits.size()) raise(Errc::MaskExhausted, "daBits");
  return dabits[next_dabit++];
}

std::array<PreprocessingStore, 3> deal_preprocessing(Backend b, const PreprocessingBudget& budget,
                                                     uint64_t seed) {
  std::mt19937_64 rng = seeded_engine(seed, /*tag=*/0x707265'70ULL);

  std::array<PreprocessingStore, 3> stores;
  for (auto& st : stores) st.backend = b;

  if (b == Backend::Rep3) {
    uint64_t k[3] = {rng(), rng(), rng()};
    uint64_t kb[3] = {rng(), rng(), rng()};
    for (int i = 0; i < 3; ++i) {
      stores[i].zero_keys = {k[i], k[next_party(i)]};
      stores[i].zero_keys_bin = {kb[i], kb[next_party(i)]};
    }
  } else {
    stores[0].triples.reserve(budget.triples);
    for (uint64_t n = 0; n < budget.triples; ++n) {
      uint64_t a = rng(), bb = rng();
      auto sa = share_arith(b, a, rng);
      auto sb = share_arith(b, bb, rng);
      auto sc = share_arith(b, a * bb, rng);
      for (int i = 0; i < 3; ++i) stores[i].triples.push_back({sa[i], sb[i], sc[i]});
    }
    for (uint64_t n = 0; n < budget.bit_triples; ++n) {
      uint8_t a = static_cast<uint8_t>(rng() & 1), bb = static_cast<uint8_t>(rng() & 1);
      auto sa = share_bit(b, a, rng);
      auto sb = share_bit(b, bb, rng);
      auto sc = share_bit(b, a & bb, rng);
      for (int i = 0; i < 3; ++i) stores[i].bit_triples.push_back({sa[i], sb[i], sc[i]});
    }
  }

  for (uint64_t n = 0; n < budget.masks; ++n) {
    uint64_t r = rng();
    auto sr = share_arith(b, r, rng);
    std::array<std::array<BitShare, 64>, 3> bits{};
    for (int j = 0; j < 64; ++j) {
      auto sb = share_bit(b, static_cast<uint8_t>((r >> j) & 1), rng);
      for (int i = 0; i < 3; ++i) bits[i][j] = sb[i];
    }
    for (int i = 0; i < 3; ++i) stores[i].masks.push_back({sr[i], bits[i]});
  }

  for (uint64_t n = 0; n < budget.dabits; ++n) {
    uint8_t bit = static_cast<uint8_t>(rng() & 1);
    auto sb = share_bit(b, bit, rng);
    auto sa = share_arith(b, bit, rng);
    for (int i = 0; i < 3; ++i) stores[i].dabits.push_back({sb[i], sa[i]});
  }

  return stores;
}

}  // namespace lembill
