#pragma once

// Arithmetic in Z_{2^64} with a two's-complement signed reading, and the
// fixed-point money representation used for prices, coefficients and bills.
// The secure engine and the clear billing model both compute in this ring,
// which is what makes their outputs comparable bit for bit.

#include <cstdint>

#include "lembill/errors.hpp"

namespace lembill {

using Int128 = __int128;

// Micro-units of currency per energy unit. All prices and bills share it.
inline constexpr int64_t kMoneyScale = 1'000'000;

// One element of Z_{2^64}. Addition, subtraction and multiplication wrap;
// signed_value() reads the residue as two's complement.
struct RingValue {
  uint64_t raw = 0;

  constexpr RingValue() = default;
  constexpr explicit RingValue(uint64_t r) : raw(r) {}

  static constexpr RingValue from_signed(int64_t s) {
    return RingValue{static_cast<uint64_t>(s)};
  }

  constexpr int64_t signed_value() const { return static_cast<int64_t>(raw); }

  friend constexpr RingValue operator+(RingValue a, RingValue b) {
    return RingValue{a.raw + b.raw};
  }
  friend constexpr RingValue operator-(RingValue a, RingValue b) {
    return RingValue{a.raw - b.raw};
  }
  friend constexpr RingValue operator*(RingValue a, RingValue b) {
    return RingValue{a.raw * b.raw};
  }
  constexpr RingValue operator-() const { return RingValue{~raw + 1}; }

  friend constexpr bool operator==(RingValue a, RingValue b) { return a.raw == b.raw; }
};

constexpr RingValue ring_add(RingValue a, RingValue b) { return a + b; }
constexpr RingValue ring_sub(RingValue a, RingValue b) { return a - b; }
constexpr RingValue ring_mul(RingValue a, RingValue b) { return a * b; }

// Money at scale 10^6, stored as a ring element (signed reading).
struct FixedPointMoney {
  RingValue scaled;

  constexpr FixedPointMoney() = default;
  constexpr explicit FixedPointMoney(RingValue v) : scaled(v) {}

  static constexpr FixedPointMoney from_micro(int64_t micro) {
    return FixedPointMoney{RingValue::from_signed(micro)};
  }

  constexpr int64_t micro() const { return scaled.signed_value(); }

  friend constexpr FixedPointMoney operator+(FixedPointMoney a, FixedPointMoney b) {
    return FixedPointMoney{a.scaled + b.scaled};
  }
  friend constexpr FixedPointMoney operator-(FixedPointMoney a, FixedPointMoney b) {
    return FixedPointMoney{a.scaled - b.scaled};
  }
  friend constexpr bool operator==(FixedPointMoney a, FixedPointMoney b) {
    return a.scaled == b.scaled;
  }
};

// All-public multiplicative factor of a deviation term, quantized once.
struct PublicCoefficient {
  FixedPointMoney value;
};

// round-half-away-from-zero(numerator * kMoneyScale / denominator).
//
// The deviation coefficient t_z * W / p_z * (price delta) is assembled as a
// single exact rational and passed through here exactly once, so there is no
// compounding of rounding steps between the clear model and the engine.
PublicCoefficient quantize_coefficient(Int128 numerator, Int128 denominator);

}  // namespace lembill
