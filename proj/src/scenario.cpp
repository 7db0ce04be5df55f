#include "lembill/scenario.hpp"

#include <algorithm>

#include "json.hpp"
#include "lembill/rng.hpp"

namespace lembill {

using nlohmann::json;

void ScenarioParams::validate() const {
  if (n_users == 0) raise(Errc::InvalidParams, "n_users must be positive");
  if (n_zones == 0) raise(Errc::InvalidParams, "n_zones must be positive");
  if (n_periods == 0) raise(Errc::InvalidParams, "n_periods must be positive");
  if (n_suppliers == 0) raise(Errc::InvalidParams, "n_suppliers must be positive");
  if (activity_rate < 0.0 || activity_rate > 1.0)
    raise(Errc::InvalidParams, "activity_rate outside [0, 1]");
  if (seller_fraction < 0.0 || seller_fraction > 1.0)
    raise(Errc::InvalidParams, "seller_fraction outside [0, 1]");
  if (bid_min_w < 1 || bid_min_w > bid_max_w) raise(Errc::InvalidParams, "bad bid range");
  if (deviation_spread_w < 0) raise(Errc::InvalidParams, "negative deviation spread");
  if (bid_max_w + deviation_spread_w > kMaxEnergyWh)
    raise(Errc::InvalidParams, "bid range plus spread exceeds the energy bound");
  if (zone_rule != "round_robin" && zone_rule != "uniform")
    raise(Errc::InvalidParams, "zone_rule must be round_robin or uniform");
}

std::vector<ZoneId> Scenario::zone_ids() const {
  std::vector<ZoneId> out(params.n_zones);
  for (uint32_t z = 0; z < params.n_zones; ++z) out[z] = z;
  return out;
}

std::map<UserId, SupplierId> Scenario::contracts() const {
  std::map<UserId, SupplierId> out;
  for (const UserMeta& u : users) out[u.id] = u.supplier;
  return out;
}

namespace {

PriceSchedule draw_prices(uint32_t period, uint32_t n_zones, std::mt19937_64& rng) {
  PriceSchedule p;
  p.period = period;
  std::uniform_int_distribution<int64_t> tp(80'000, 120'000);
  std::uniform_int_distribution<int64_t> fit(30'000, 50'000);
  std::uniform_int_distribution<int64_t> rp(150'000, 200'000);
  std::uniform_int_distribution<int64_t> nf(2'000, 20'000);
  p.tp = FixedPointMoney::from_micro(tp(rng));
  p.fit = FixedPointMoney::from_micro(fit(rng));
  p.rp = FixedPointMoney::from_micro(rp(rng));
  for (uint32_t z = 0; z < n_zones; ++z)
    p.zone_fees[z] = {FixedPointMoney::from_micro(nf(rng)), FixedPointMoney::from_micro(nf(rng))};
  return p;
}

void draw_period_values(Scenario& s, std::mt19937_64& rng) {
  const ScenarioParams& prm = s.params;
  std::bernoulli_distribution is_active(prm.activity_rate);
  std::bernoulli_distribution is_seller(prm.seller_fraction);
  std::uniform_int_distribution<int64_t> bid(prm.bid_min_w, prm.bid_max_w);
  std::uniform_int_distribution<int64_t> dev(-prm.deviation_spread_w, prm.deviation_spread_w);

  s.periods.assign(prm.n_periods, std::vector<PeriodRecord>(prm.n_users));
  for (uint32_t k = 0; k < prm.n_periods; ++k) {
    for (uint32_t i = 0; i < prm.n_users; ++i) {
      PeriodRecord& r = s.periods[k][i];
      if (!is_active(rng)) {
        r = PeriodRecord{};  // zero-filled, counts as a buyer with no deviation
        continue;
      }
      r.active = 1;
      int64_t volume = bid(rng);
      r.b_w = is_seller(rng) ? volume : -volume;
      r.d = r.b_w > 0 ? 1 : 0;
      r.m_w = std::clamp(r.b_w + dev(rng), -kMaxEnergyWh, kMaxEnergyWh);
    }
  }
}

}  // namespace

Scenario generate_scenario(const ScenarioParams& params, uint64_t seed) {
  params.validate();
  Scenario s;
  s.seed = seed;
  s.params = params;

  std::mt19937_64 structure_rng = seeded_engine(seed, /*tag=*/0x73747275ULL);
  std::uniform_int_distribution<uint32_t> zone_pick(0, params.n_zones - 1);
  std::uniform_int_distribution<uint32_t> supplier_pick(0, params.n_suppliers - 1);
  s.users.resize(params.n_users);
  for (uint32_t i = 0; i < params.n_users; ++i) {
    s.users[i].id = i + 1;
    s.users[i].zone = params.zone_rule == "round_robin" ? i % params.n_zones : zone_pick(structure_rng);
    s.users[i].supplier = supplier_pick(structure_rng);
  }

  std::mt19937_64 price_rng = seeded_engine(seed, /*tag=*/0x70726963ULL);
  s.prices.reserve(params.n_periods);
  for (uint32_t k = 0; k < params.n_periods; ++k)
    s.prices.push_back(draw_prices(k, params.n_zones, price_rng));

  std::mt19937_64 value_rng = seeded_engine(seed, /*tag=*/0x76616c75ULL);
  draw_period_values(s, value_rng);
  return s;
}

void rerandomize_values(Scenario& s, uint64_t value_seed) {
  std::mt19937_64 value_rng = seeded_engine(value_seed, /*tag=*/0x76616c75ULL);
  draw_period_values(s, value_rng);
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["schema"] = "lembill-scenario";
  j["version"] = s.version;
  j["seed"] = s.seed;
  j["params"] = {{"n_users", s.params.n_users},
                 {"n_zones", s.params.n_zones},
                 {"n_periods", s.params.n_periods},
                 {"n_suppliers", s.params.n_suppliers},
                 {"activity_rate", s.params.activity_rate},
                 {"bid_min_w", s.params.bid_min_w},
                 {"bid_max_w", s.params.bid_max_w},
                 {"deviation_spread_w", s.params.deviation_spread_w},
                 {"seller_fraction", s.params.seller_fraction},
                 {"zone_rule", s.params.zone_rule}};
  j["users"] = json::array();
  for (const UserMeta& u : s.users)
    j["users"].push_back({{"id", u.id}, {"supplier", u.supplier}, {"zone", u.zone}});
  j["prices"] = json::array();
  for (const PriceSchedule& p : s.prices) {
    json fees = json::array();
    for (const auto& [z, f] : p.zone_fees)
      fees.push_back({{"zone", z}, {"nf_p_micro", f.nf_p.micro()}, {"nf_c_micro", f.nf_c.micro()}});
    j["prices"].push_back({{"period", p.period},
                           {"tp_micro", p.tp.micro()},
                           {"fit_micro", p.fit.micro()},
                           {"rp_micro", p.rp.micro()},
                           {"zone_fees", fees}});
  }
  j["periods"] = json::array();
  for (uint32_t k = 0; k < s.periods.size(); ++k) {
    json recs = json::array();
    for (uint32_t i = 0; i < s.periods[k].size(); ++i) {
      const PeriodRecord& r = s.periods[k][i];
      recs.push_back({{"user", s.users[i].id},
                      {"active", r.active},
                      {"d", r.d},
                      {"m_w", r.m_w},
                      {"b_w", r.b_w}});
    }
    j["periods"].push_back({{"period", k}, {"records", recs}});
  }
  return j.dump(1);
}

Scenario scenario_from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.value("schema", "") != "lembill-scenario")
    raise(Errc::InvalidParams, "not a lembill scenario file");
  if (j.value("version", 0) != 1) raise(Errc::InvalidParams, "unsupported scenario version");

  Scenario s;
  s.seed = j.at("seed").get<uint64_t>();
  const json& p = j.at("params");
  s.params.n_users = p.at("n_users").get<uint32_t>();
  s.params.n_zones = p.at("n_zones").get<uint32_t>();
  s.params.n_periods = p.at("n_periods").get<uint32_t>();
  s.params.n_suppliers = p.at("n_suppliers").get<uint32_t>();
  s.params.activity_rate = p.at("activity_rate").get<double>();
  s.params.bid_min_w = p.at("bid_min_w").get<int64_t>();
  s.params.bid_max_w = p.at("bid_max_w").get<int64_t>();
  s.params.deviation_spread_w = p.at("deviation_spread_w").get<int64_t>();
  s.params.seller_fraction = p.at("seller_fraction").get<double>();
  s.params.zone_rule = p.at("zone_rule").get<std::string>();
  s.params.validate();

  std::map<UserId, uint32_t> index_of;
  for (const json& u : j.at("users")) {
    UserMeta m{u.at("id").get<UserId>(), u.at("supplier").get<SupplierId>(),
               u.at("zone").get<ZoneId>()};
    if (index_of.count(m.id)) raise(Errc::DuplicateUserId, "user " + std::to_string(m.id));
    if (m.zone >= s.params.n_zones) raise(Errc::UnknownZone, "zone " + std::to_string(m.zone));
    index_of[m.id] = static_cast<uint32_t>(s.users.size());
    s.users.push_back(m);
  }
  if (s.users.size() != s.params.n_users) raise(Errc::InvalidParams, "user count mismatch");

  for (const json& pj : j.at("prices")) {
    PriceSchedule ps;
    ps.period = pj.at("period").get<uint32_t>();
    ps.tp = FixedPointMoney::from_micro(pj.at("tp_micro").get<int64_t>());
    ps.fit = FixedPointMoney::from_micro(pj.at("fit_micro").get<int64_t>());
    ps.rp = FixedPointMoney::from_micro(pj.at("rp_micro").get<int64_t>());
    for (const json& f : pj.at("zone_fees"))
      ps.zone_fees[f.at("zone").get<ZoneId>()] = {
          FixedPointMoney::from_micro(f.at("nf_p_micro").get<int64_t>()),
          FixedPointMoney::from_micro(f.at("nf_c_micro").get<int64_t>())};
    s.prices.push_back(std::move(ps));
  }
  if (s.prices.size() != s.params.n_periods) raise(Errc::InvalidParams, "price period mismatch");

  s.periods.assign(s.params.n_periods, std::vector<PeriodRecord>(s.params.n_users));
  for (const json& pj : j.at("periods")) {
    uint32_t k = pj.at("period").get<uint32_t>();
    if (k >= s.params.n_periods) raise(Errc::InvalidParams, "period index out of range");
    for (const json& rj : pj.at("records")) {
      UserId uid = rj.at("user").get<UserId>();
      auto it = index_of.find(uid);
      if (it == index_of.end()) raise(Errc::UnknownUserId, "record for user " + std::to_string(uid));
      PeriodRecord& r = s.periods[k][it->second];
      r.active = rj.at("active").get<uint8_t>();
      r.d = rj.at("d").get<uint8_t>();
      r.m_w = rj.at("m_w").get<int64_t>();
      r.b_w = rj.at("b_w").get<int64_t>();
      if (std::abs(r.m_w) > kMaxEnergyWh || std::abs(r.b_w) > kMaxEnergyWh)
        raise(Errc::InvalidParams, "energy value exceeds bound");
    }
  }
  return s;
}

std::vector<UserRecord> clear_records(const Scenario& s, uint32_t period) {
  std::vector<UserRecord> out(s.params.n_users);
  for (uint32_t i = 0; i < s.params.n_users; ++i) {
    const PeriodRecord& r = s.periods.at(period)[i];
    out[i] = UserRecord{s.users[i].id,
                        s.users[i].supplier,
                        s.users[i].zone,
                        r.d,
                        RingValue::from_signed(r.m_w),
                        RingValue::from_signed(r.b_w),
                        r.active};
  }
  return out;
}

std::vector<std::vector<BillStatement>> oracle_settle(const Scenario& s) {
  std::vector<std::vector<BillStatement>> out;
  out.reserve(s.params.n_periods);
  for (uint32_t k = 0; k < s.params.n_periods; ++k)
    out.push_back(settle_period(clear_records(s, k), s.prices[k]));
  return out;
}

}  // namespace lembill
