#pragma once

// Synthetic market instances: reproducible generation, JSON serialization,
// and the clear view handed to the billing model. Values are integer Watts
// within ring-safe bounds; the generator is deterministic under its seed.
//
// The distributions are synthetic defaults (uniform bids with a uniform
// deviation spread), chosen so that zones realise oversupplying,
// undersupplying and balanced regimes with high probability.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lembill/billing.hpp"

namespace lembill {

inline constexpr int64_t kMaxEnergyWh = 10'000'000;  // |m|, |b| bound

struct ScenarioParams {
  uint32_t n_users = 0;
  uint32_t n_zones = 1;
  uint32_t n_periods = 1;
  uint32_t n_suppliers = 3;
  double activity_rate = 0.9;
  int64_t bid_min_w = 50;
  int64_t bid_max_w = 5000;
  int64_t deviation_spread_w = 200;
  double seller_fraction = 0.5;
  std::string zone_rule = "round_robin";  // or "uniform"

  void validate() const;  // raises InvalidParams
};

struct PeriodRecord {
  uint8_t active = 0;
  uint8_t d = 0;
  int64_t m_w = 0;
  int64_t b_w = 0;

  friend bool operator==(const PeriodRecord&, const PeriodRecord&) = default;
};

struct UserMeta {
  UserId id = 0;
  SupplierId supplier = 0;
  ZoneId zone = 0;
};

struct Scenario {
  uint32_t version = 1;
  uint64_t seed = 0;
  ScenarioParams params;
  std::vector<UserMeta> users;
  std::vector<PriceSchedule> prices;                // one entry per period
  std::vector<std::vector<PeriodRecord>> periods;   // [period][user index]

  std::vector<ZoneId> zone_ids() const;
  std::map<UserId, SupplierId> contracts() const;
};

Scenario generate_scenario(const ScenarioParams& params, uint64_t seed);

// Redraws every private value (activity, d, m, b) under a new seed while
// keeping user identities, zone and supplier assignment, and prices fixed.
void rerandomize_values(Scenario& s, uint64_t value_seed);

std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);

// Clear user records of one period, in user order.
std::vector<UserRecord> clear_records(const Scenario& s, uint32_t period);

// The reference settlement: every period through the clear billing model.
std::vector<std::vector<BillStatement>> oracle_settle(const Scenario& s);

}  // namespace lembill
