#pragma once

// Clear-text zone-based billing model with universal deviation cost split.
// This is the reference every secure execution is checked against, so it
// computes in the same ring and with the same quantization as the engine.
//
// Conventions:
//   - meter readings m and bid volumes b are signed net energy in Wh,
//     exports positive, imports negative, so v = m - b is uniform for
//     sellers and buyers and positive global deviation T means oversupply.
//   - bills are signed micro-units, positive = credit to the user.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "lembill/ring.hpp"

namespace lembill {

using UserId = uint32_t;
using SupplierId = uint32_t;
using ZoneId = uint32_t;

// Per-user record for one trading period. An inactive user is zero-filled
// (m = b = 0, d = 0) and indistinguishable from a buyer with no deviation.
struct UserRecord {
  UserId user_id = 0;
  SupplierId supplier_id = 0;
  ZoneId zone_id = 0;
  uint8_t d = 0;  // 1 = seller/prosumer, 0 = buyer/consumer
  RingValue m;    // meter reading, signed Wh
  RingValue b;    // bid volume, signed Wh
  uint8_t active = 1;
};

struct ZoneAggregate {
  ZoneId zone_id = 0;
  RingValue t;      // total zone deviation t_z
  uint64_t p = 0;   // prosumer count p_z
  uint64_t c = 0;   // consumer count c_z
  std::vector<RingValue> deviations;  // per-user v_i, input order
};

// Output of the weight computation. W is kept as an exact rational
// (w_num / w_den, w_den > 0); it is undefined and unused when T = 0.
// P and C are carried for reporting but do not enter any bill.
struct GlobalDeviation {
  int64_t total = 0;     // T
  int64_t zd_over = 0;   // sum of positive zone deviations
  int64_t zd_under = 0;  // sum of negative zone deviations
  int64_t w_num = 0;
  int64_t w_den = 1;
  bool w_defined = false;
  uint64_t prosumers = 0;  // P
  uint64_t consumers = 0;  // C
};

struct ZoneFees {
  FixedPointMoney nf_p;  // export network fee per Wh
  FixedPointMoney nf_c;  // import network fee per Wh
};

struct PriceSchedule {
  uint32_t period = 0;
  FixedPointMoney tp;   // LEM trading price per Wh
  FixedPointMoney fit;  // feed-in tariff per Wh
  FixedPointMoney rp;   // retail price per Wh
  std::map<ZoneId, ZoneFees> zone_fees;

  const ZoneFees& fees_for(ZoneId z) const;
  // Economic sanity FiT < TP < RP. Violations are tolerated, not fatal.
  bool prices_ordered() const { return fit.micro() < tp.micro() && tp.micro() < rp.micro(); }
};

struct BillStatement {
  UserId user_id = 0;
  uint32_t period = 0;
  FixedPointMoney amount;
};

// Per-zone, per-branch public coefficients of the deviation terms, one
// quantization each. A branch that cannot trigger carries coefficient 0,
// including the p_z = 0 (resp. c_z = 0) corner where no user in the zone
// can satisfy the d-gate of that branch.
struct ZoneBranchCoefficients {
  FixedPointMoney over;   // applied to sellers when T > 0 and t_z > 0
  FixedPointMoney under;  // applied to buyers when T < 0 and t_z < 0
};

ZoneBranchCoefficients zone_coefficients(const ZoneAggregate& z, const GlobalDeviation& g,
                                         const PriceSchedule& prices);

// Deviations aggregation over one zone: v_i = m_i - b_i, t = sum v_i,
// p = sum d_i, c = sum (1 - d_i). Throws MixedZones on foreign records.
ZoneAggregate aggregate_zone(std::span<const UserRecord> users);

// Global deviation and zonal weight over all zone aggregates.
GlobalDeviation compute_weight(std::span<const ZoneAggregate> zones);

// One user's bill: base term plus at most one deviation term.
BillStatement bill_user(const UserRecord& u, const ZoneAggregate& z, const GlobalDeviation& g,
                        const PriceSchedule& prices);

// Full clear settlement of one trading period. Users may arrive in any
// order; zone membership is taken from the records themselves.
std::vector<BillStatement> settle_period(std::span<const UserRecord> users,
                                         const PriceSchedule& prices);

// Sum of each user's bills across periods, grouped by contracted supplier.
std::map<SupplierId, std::vector<std::pair<UserId, FixedPointMoney>>>
aggregate_supplier_statements(std::span<const std::vector<BillStatement>> period_bills,
                              const std::map<UserId, SupplierId>& contracts);

}  // namespace lembill
