#include "lembill/engine.hpp"

#include <array>

namespace lembill {

const char* open_tag_name(OpenTag t) {
  switch (t) {
    case OpenTag::ZoneTuple: return "zone_tuple";
    case OpenTag::MaskedCompare: return "masked_compare";
    case OpenTag::BeaverMask: return "beaver_mask";
    case OpenTag::Deviation: return "deviation";
  }
  return "?";
}

namespace {
// Kogge-Stone style suffix windows over the 63 low-order equality bits.
constexpr int kCmpBits = 64;
constexpr int kLowBits = kCmpBits - 1;
constexpr std::array<int, 6> kSuffixOffsets{1, 2, 4, 8, 16, 32};
}  // namespace

uint32_t comparison_and_count() {
  uint32_t n = 0;
  for (int off : kSuffixOffsets) n += static_cast<uint32_t>(kLowBits - 1 - off + 1);
  n += kLowBits;  // borrow terms (62) plus the zero-test fold (1)
  n += 1;         // final gt combine
  return n;
}

void PartyEngine::init_zero_sharing() {
  zero_own_ = PrfStream(store_.zero_keys[0]);
  zero_next_ = PrfStream(store_.zero_keys[1]);
  zero_bin_own_ = PrfStream(store_.zero_keys_bin[0]);
  zero_bin_next_ = PrfStream(store_.zero_keys_bin[1]);
}

ArithShare PartyEngine::add_public(const ArithShare& a, uint64_t k) const {
  // Component 0 absorbs the constant, at every party that stores it.
  ArithShare r = a;
  if (backend_ == Backend::Rep3) {
    if (party_ == 0) r.c[0] += k;
    if (party_ == 2) r.c[1] += k;
  } else if (party_ == 0) {
    r.c[0] += k;
  }
  return r;
}

BitShare PartyEngine::bxor_public(const BitShare& a, uint8_t bit) const {
  BitShare r = a;
  bit &= 1;
  if (backend_ == Backend::Rep3) {
    if (party_ == 0) r.c[0] ^= bit;
    if (party_ == 2) r.c[1] ^= bit;
  } else if (party_ == 0) {
    r.c[0] ^= bit;
  }
  return r;
}

std::vector<ArithShare> PartyEngine::mul(std::span<const ArithShare> xs,
                                         std::span<const ArithShare> ys) {
  if (xs.size() != ys.size()) raise(Errc::BackendMismatch, "mul operand batch sizes differ");
  if (xs.empty()) return {};
  return backend_ == Backend::Rep3 ? mul_rep3(xs, ys) : mul_additive(xs, ys);
}

std::vector<ArithShare> PartyEngine::mul_rep3(std::span<const ArithShare> xs,
                                              std::span<const ArithShare> ys) {
  size_t n = xs.size();
  std::vector<uint64_t> z(n);
  for (size_t k = 0; k < n; ++k) {
    uint64_t alpha = zero_own_.next() - zero_next_.next();
    z[k] = xs[k].c[0] * ys[k].c[0] + xs[k].c[0] * ys[k].c[1] + xs[k].c[1] * ys[k].c[0] + alpha;
  }
  PayloadWriter w;
  w.u64_array(z);
  auto buf = w.take();
  send_peer(prev_party(party_), buf);
  WireMessage m = recv_peer(next_party(party_));
  PayloadReader r(m.payload);
  std::vector<uint64_t> z_next = r.u64_array();
  if (z_next.size() != n) raise(Errc::WireFormat, "mul reshare size mismatch");
  std::vector<ArithShare> out(n);
  for (size_t k = 0; k < n; ++k) out[k].c = {z[k], z_next[k]};
  bump_round();
  return out;
}

std::vector<ArithShare> PartyEngine::mul_additive(std::span<const ArithShare> xs,
                                                  std::span<const ArithShare> ys) {
  size_t n = xs.size();
  std::vector<const BeaverTriple*> ts(n);
  std::vector<uint64_t> de(2 * n);
  for (size_t k = 0; k < n; ++k) {
    ts[k] = &store_.take_triple();
    de[k] = xs[k].c[0] - ts[k]->a.c[0];
    de[n + k] = ys[k].c[0] - ts[k]->b.c[0];
  }
  PayloadWriter w;
  w.u64_array(de);
  auto buf = w.take();
  send_peer(next_party(party_), buf);
  send_peer(prev_party(party_), buf);
  std::vector<uint64_t> sum = de;
  for (int peer_idx : {next_party(party_), prev_party(party_)}) {
    WireMessage m = recv_peer(peer_idx);
    PayloadReader r(m.payload);
    std::vector<uint64_t> part = r.u64_array();
    if (part.size() != 2 * n) raise(Errc::WireFormat, "beaver open size mismatch");
    for (size_t k = 0; k < 2 * n; ++k) sum[k] += part[k];
  }
  open_log_.push_back({phase_, OpenTag::BeaverMask, static_cast<uint32_t>(2 * n)});
  std::vector<ArithShare> out(n);
  for (size_t k = 0; k < n; ++k) {
    uint64_t d = sum[k], e = sum[n + k];
    uint64_t zi = ts[k]->c.c[0] + d * ts[k]->b.c[0] + e * ts[k]->a.c[0];
    if (party_ == 0) zi += d * e;
    out[k].c = {zi, 0};
  }
  bump_round();
  return out;
}

std::vector<BitShare> PartyEngine::band(std::span<const BitShare> xs,
                                        std::span<const BitShare> ys) {
  if (xs.size() != ys.size()) raise(Errc::BackendMismatch, "band operand batch sizes differ");
  if (xs.empty()) return {};
  return backend_ == Backend::Rep3 ? band_rep3(xs, ys) : band_additive(xs, ys);
}

std::vector<BitShare> PartyEngine::band_rep3(std::span<const BitShare> xs,
                                             std::span<const BitShare> ys) {
  size_t n = xs.size();
  std::vector<uint8_t> z(n);
  for (size_t k = 0; k < n; ++k) {
    uint8_t beta = static_cast<uint8_t>(zero_bin_own_.next_bit() ^ zero_bin_next_.next_bit());
    z[k] = static_cast<uint8_t>(((xs[k].c[0] & ys[k].c[0]) ^ (xs[k].c[0] & ys[k].c[1]) ^
                                 (xs[k].c[1] & ys[k].c[0]) ^ beta) &
                                1);
  }
  PayloadWriter w;
  w.u8_array(z);
  auto buf = w.take();
  send_peer(prev_party(party_), buf);
  WireMessage m = recv_peer(next_party(party_));
  PayloadReader r(m.payload);
  std::vector<uint8_t> z_next = r.u8_array();
  if (z_next.size() != n) raise(Errc::WireFormat, "band reshare size mismatch");
  std::vector<BitShare> out(n);
  for (size_t k = 0; k < n; ++k) out[k].c = {z[k], z_next[k]};
  bump_round();
  return out;
}

std::vector<BitShare> PartyEngine::band_additive(std::span<const BitShare> xs,
                                                 std::span<const BitShare> ys) {
  size_t n = xs.size();
  std::vector<const BitTriple*> ts(n);
  std::vector<uint8_t> de(2 * n);
  for (size_t k = 0; k < n; ++k) {
    ts[k] = &store_.take_bit_triple();
    de[k] = static_cast<uint8_t>(xs[k].c[0] ^ ts[k]->a.c[0]);
    de[n + k] = static_cast<uint8_t>(ys[k].c[0] ^ ts[k]->b.c[0]);
  }
  PayloadWriter w;
  w.u8_array(de);
  auto buf = w.take();
  send_peer(next_party(party_), buf);
  send_peer(prev_party(party_), buf);
  std::vector<uint8_t> sum = de;
  for (int peer_idx : {next_party(party_), prev_party(party_)}) {
    WireMessage m = recv_peer(peer_idx);
    PayloadReader r(m.payload);
    std::vector<uint8_t> part = r.u8_array();
    if (part.size() != 2 * n) raise(Errc::WireFormat, "bit beaver open size mismatch");
    for (size_t k = 0; k < 2 * n; ++k) sum[k] ^= part[k];
  }
  std::vector<BitShare> out(n);
  for (size_t k = 0; k < n; ++k) {
    uint8_t d = sum[k], e = sum[n + k];
    uint8_t zi = static_cast<uint8_t>(ts[k]->c.c[0] ^ (d & ts[k]->b.c[0]) ^ (e & ts[k]->a.c[0]));
    if (party_ == 0) zi ^= static_cast<uint8_t>(d & e);
    out[k].c = {static_cast<uint8_t>(zi & 1), 0};
  }
  bump_round();
  return out;
}

std::vector<uint64_t> PartyEngine::open(std::span<const ArithShare> shares, OpenTag tag) {
  size_t n = shares.size();
  std::vector<uint64_t> out(n);
  if (backend_ == Backend::Rep3) {
    std::vector<uint64_t> second(n);
    for (size_t k = 0; k < n; ++k) second[k] = shares[k].c[1];
    PayloadWriter w;
    w.u64_array(second);
    send_peer(prev_party(party_), w.take());
    WireMessage m = recv_peer(next_party(party_));
    PayloadReader r(m.payload);
    std::vector<uint64_t> missing = r.u64_array();
    if (missing.size() != n) raise(Errc::WireFormat, "open size mismatch");
    for (size_t k = 0; k < n; ++k) out[k] = shares[k].c[0] + shares[k].c[1] + missing[k];
  } else {
    std::vector<uint64_t> own(n);
    for (size_t k = 0; k < n; ++k) own[k] = shares[k].c[0];
    PayloadWriter w;
    w.u64_array(own);
    auto buf = w.take();
    send_peer(next_party(party_), buf);
    send_peer(prev_party(party_), buf);
    out = own;
    for (int peer_idx : {next_party(party_), prev_party(party_)}) {
      WireMessage m = recv_peer(peer_idx);
      PayloadReader r(m.payload);
      std::vector<uint64_t> part = r.u64_array();
      if (part.size() != n) raise(Errc::WireFormat, "open size mismatch");
      for (size_t k = 0; k < n; ++k) out[k] += part[k];
    }
  }
  open_log_.push_back({phase_, tag, static_cast<uint32_t>(n)});
  bump_round();
  return out;
}

std::vector<uint64_t> PartyEngine::open_checked(std::span<const ArithShare> shares, OpenTag tag) {
  std::vector<uint64_t> mine = open(shares, tag);
  PayloadWriter w;
  w.u64_array(mine);
  auto buf = w.take();
  send_peer(next_party(party_), buf);
  send_peer(prev_party(party_), buf);
  for (int peer_idx : {next_party(party_), prev_party(party_)}) {
    WireMessage m = recv_peer(peer_idx);
    PayloadReader r(m.payload);
    std::vector<uint64_t> theirs = r.u64_array();
    if (theirs != mine)
      raise(Errc::OpenDisagreement, "parties reconstructed different values in phase " +
                                        std::to_string(static_cast<int>(phase_)));
  }
  bump_round();
  return mine;
}

std::vector<uint8_t> PartyEngine::open_bits(std::span<const BitShare> shares, OpenTag tag) {
  size_t n = shares.size();
  std::vector<uint8_t> out(n);
  if (backend_ == Backend::Rep3) {
    std::vector<uint8_t> second(n);
    for (size_t k = 0; k < n; ++k) second[k] = shares[k].c[1];
    PayloadWriter w;
    w.u8_array(second);
    send_peer(prev_party(party_), w.take());
    WireMessage m = recv_peer(next_party(party_));
    PayloadReader r(m.payload);
    std::vector<uint8_t> missing = r.u8_array();
    if (missing.size() != n) raise(Errc::WireFormat, "open_bits size mismatch");
    for (size_t k = 0; k < n; ++k)
      out[k] = static_cast<uint8_t>((shares[k].c[0] ^ shares[k].c[1] ^ missing[k]) & 1);
  } else {
    std::vector<uint8_t> own(n);
    for (size_t k = 0; k < n; ++k) own[k] = shares[k].c[0];
    PayloadWriter w;
    w.u8_array(own);
    auto buf = w.take();
    send_peer(next_party(party_), buf);
    send_peer(prev_party(party_), buf);
    out = own;
    for (int peer_idx : {next_party(party_), prev_party(party_)}) {
      WireMessage m = recv_peer(peer_idx);
      PayloadReader r(m.payload);
      std::vector<uint8_t> part = r.u8_array();
      if (part.size() != n) raise(Errc::WireFormat, "open_bits size mismatch");
      for (size_t k = 0; k < n; ++k) out[k] = static_cast<uint8_t>((out[k] ^ part[k]) & 1);
    }
  }
  open_log_.push_back({phase_, tag, static_cast<uint32_t>(n)});
  bump_round();
  return out;
}

SignBits PartyEngine::compare_sign(std::span<const ArithShare> vs) {
  size_t n = vs.size();
  SignBits result;
  if (n == 0) return result;

  // u = v + r, opened; v's sign is then recoverable from the public bits of
  // u and the shared bits of r without touching v again.
  std::vector<const ComparisonMask*> masks(n);
  std::vector<ArithShare> masked(n);
  for (size_t k = 0; k < n; ++k) {
    masks[k] = &store_.take_mask();
    masked[k] = add(vs[k], masks[k]->r);
  }
  std::vector<uint64_t> u = open(masked, OpenTag::MaskedCompare);

  // Equality bits e_j = not(u_j xor r_j) and candidate borrow bits
  // a_j = not(u_j) and r_j, all local.
  std::vector<std::array<BitShare, kCmpBits>> e(n);
  std::vector<std::array<BitShare, kLowBits>> a(n);
  for (size_t k = 0; k < n; ++k) {
    for (int j = 0; j < kCmpBits; ++j) {
      uint8_t uj = static_cast<uint8_t>((u[k] >> j) & 1);
      e[k][j] = bxor_public(masks[k]->r_bits[j], static_cast<uint8_t>(uj ^ 1));
      if (j < kLowBits) a[k][j] = (uj == 0) ? masks[k]->r_bits[j] : BitShare{};
    }
  }

  // Suffix ANDs over e_0..e_62: after the last level, suffix[k][i] is the
  // AND of e_i..e_62.
  std::vector<std::array<BitShare, kLowBits>> suffix(n);
  for (size_t k = 0; k < n; ++k)
    for (int i = 0; i < kLowBits; ++i) suffix[k][i] = e[k][i];
  for (int off : kSuffixOffsets) {
    std::vector<BitShare> lhs, rhs;
    lhs.reserve(n * kLowBits);
    rhs.reserve(n * kLowBits);
    for (size_t k = 0; k < n; ++k)
      for (int i = 0; i + off < kLowBits; ++i) {
        lhs.push_back(suffix[k][i]);
        rhs.push_back(suffix[k][i + off]);
      }
    std::vector<BitShare> prod = band(lhs, rhs);
    size_t idx = 0;
    for (size_t k = 0; k < n; ++k)
      for (int i = 0; i + off < kLowBits; ++i) suffix[k][i] = prod[idx++];
  }

  // Borrow into bit 63: exactly one term a_i AND (e_{i+1}..e_62) can fire.
  // The same level also folds the zero test e_63 AND (e_0..e_62).
  std::vector<BitShare> lhs, rhs;
  lhs.reserve(n * kLowBits);
  rhs.reserve(n * kLowBits);
  for (size_t k = 0; k < n; ++k) {
    for (int i = 0; i + 1 < kLowBits; ++i) {
      lhs.push_back(a[k][i]);
      rhs.push_back(suffix[k][i + 1]);
    }
    lhs.push_back(e[k][kCmpBits - 1]);
    rhs.push_back(suffix[k][0]);
  }
  std::vector<BitShare> prods = band(lhs, rhs);

  std::vector<BitShare> not_msb(n), not_zero(n);
  result.lt.resize(n);
  size_t idx = 0;
  for (size_t k = 0; k < n; ++k) {
    BitShare borrow = a[k][kLowBits - 1];  // empty suffix window for i = 62
    for (int i = 0; i + 1 < kLowBits; ++i) borrow = bxor(borrow, prods[idx++]);
    BitShare is_zero = prods[idx++];
    uint8_t u63 = static_cast<uint8_t>((u[k] >> (kCmpBits - 1)) & 1);
    BitShare msb = bxor_public(bxor(masks[k]->r_bits[kCmpBits - 1], borrow), u63);
    result.lt[k] = msb;  // signed(v) < 0 iff the sign bit of v is set
    not_msb[k] = bnot(msb);
    not_zero[k] = bnot(is_zero);
  }
  result.gt = band(not_msb, not_zero);
  return result;
}

std::vector<ArithShare> PartyEngine::bit_to_arith(std::span<const BitShare> bits) {
  size_t n = bits.size();
  std::vector<const DaBit*> dbs(n);
  std::vector<BitShare> masked(n);
  for (size_t k = 0; k < n; ++k) {
    dbs[k] = &store_.take_dabit();
    masked[k] = bxor(bits[k], dbs[k]->binary);
  }
  std::vector<uint8_t> c = open_bits(masked, OpenTag::MaskedCompare);
  std::vector<ArithShare> out(n);
  for (size_t k = 0; k < n; ++k) {
    // bit = c xor b = c + b - 2cb; with public c this is local.
    ArithShare term = mul_public(dbs[k]->arith, c[k] ? ~0ULL : 1ULL);  // (1 - 2c) * [b]
    out[k] = add_public(term, c[k]);
  }
  return out;
}

}  // namespace lembill
