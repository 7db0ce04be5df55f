#include "lembill/billing.hpp"

#include <algorithm>
#include <cassert>
#include <unordered_map>

namespace lembill {

const ZoneFees& PriceSchedule::fees_for(ZoneId z) const {
  auto it = zone_fees.find(z);
  if (it == zone_fees.end()) raise(Errc::UnknownZone, "no fee entry for zone " + std::to_string(z));
  return it->second;
}

ZoneAggregate aggregate_zone(std::span<const UserRecord> users) {
  ZoneAggregate zn;
  if (!users.empty()) zn.zone_id = users.front().zone_id;
  zn.deviations.reserve(users.size());
  for (const UserRecord& u : users) {
    if (u.zone_id != zn.zone_id)
      raise(Errc::MixedZones, "user " + std::to_string(u.user_id) + " in zone " +
                                  std::to_string(u.zone_id) + ", expected " +
                                  std::to_string(zn.zone_id));
    RingValue v = u.m - u.b;
    zn.deviations.push_back(v);
    zn.t = zn.t + v;
    zn.p += u.d;
    zn.c += 1 - u.d;
  }
  return zn;
}

GlobalDeviation compute_weight(std::span<const ZoneAggregate> zones) {
  GlobalDeviation g;
  for (const ZoneAggregate& z : zones) {
    int64_t t = z.t.signed_value();
    g.total += t;
    if (t > 0) g.zd_over += t;
    if (t < 0) g.zd_under += t;
    g.prosumers += z.p;
    g.consumers += z.c;
  }
  if (g.total > 0) {
    g.w_num = g.total;
    g.w_den = g.zd_over;
    g.w_defined = true;
  } else if (g.total < 0) {
    // Both T and zd_under are negative; normalise to a positive denominator.
    g.w_num = -g.total;
    g.w_den = -g.zd_under;
    g.w_defined = true;
  }
  return g;
}

ZoneBranchCoefficients zone_coefficients(const ZoneAggregate& z, const GlobalDeviation& g,
                                         const PriceSchedule& prices) {
  ZoneBranchCoefficients coeff;
  int64_t tz = z.t.signed_value();
  if (g.total > 0 && tz > 0 && z.p > 0) {
    // t_z * (T / zd_over) / p_z * (FiT - TP), one exact rational.
    Int128 num = Int128(g.total) * tz * (prices.fit.micro() - prices.tp.micro());
    Int128 den = Int128(g.zd_over) * z.p * kMoneyScale;
    coeff.over = quantize_coefficient(num, den).value;
  }
  if (g.total < 0 && tz < 0 && z.c > 0) {
    Int128 num = Int128(g.total) * tz * (prices.rp.micro() - prices.tp.micro());
    Int128 den = Int128(g.zd_under) * z.c * kMoneyScale;
    coeff.under = quantize_coefficient(num, den).value;
  }
  return coeff;
}

BillStatement bill_user(const UserRecord& u, const ZoneAggregate& z, const GlobalDeviation& g,
                        const PriceSchedule& prices) {
  const ZoneFees& fees = prices.fees_for(u.zone_id);

  // Base term m * (TP - NF_p * d + NF_c * (1 - d)), exact in the ring.
  RingValue unit_price = u.d ? (prices.tp.scaled - fees.nf_p.scaled)
                             : (prices.tp.scaled + fees.nf_c.scaled);
  RingValue bill = u.m * unit_price;

  RingValue v = u.m - u.b;
  int64_t tz = z.t.signed_value();
  if (g.total > 0 && tz > 0) {
    if (v.signed_value() > 0 && u.d == 1) {
      if (z.p == 0) raise(Errc::ZeroDenominator, "prosumer branch triggered with p_z = 0");
      bill = bill + zone_coefficients(z, g, prices).over.scaled;
    }
  } else if (g.total < 0 && tz < 0) {
    if (v.signed_value() < 0 && u.d == 0) {
      if (z.c == 0) raise(Errc::ZeroDenominator, "consumer branch triggered with c_z = 0");
      bill = bill + zone_coefficients(z, g, prices).under.scaled;
    }
  }

  return BillStatement{u.user_id, prices.period, FixedPointMoney{bill}};
}

std::vector<BillStatement> settle_period(std::span<const UserRecord> users,
                                         const PriceSchedule& prices) {
  std::unordered_map<ZoneId, std::vector<UserRecord>> by_zone;
  for (const UserRecord& u : users) by_zone[u.zone_id].push_back(u);

  std::unordered_map<ZoneId, ZoneAggregate> aggregates;
  std::vector<ZoneAggregate> zone_list;
  zone_list.reserve(by_zone.size());
  for (auto& [zid, zu] : by_zone) {
    ZoneAggregate zn = aggregate_zone(zu);
    aggregates.emplace(zid, zn);
    zone_list.push_back(std::move(zn));
  }
  GlobalDeviation g = compute_weight(zone_list);

  std::vector<BillStatement> bills;
  bills.reserve(users.size());
  for (const UserRecord& u : users) bills.push_back(bill_user(u, aggregates.at(u.zone_id), g, prices));
  return bills;
}

std::map<SupplierId, std::vector<std::pair<UserId, FixedPointMoney>>>
aggregate_supplier_statements(std::span<const std::vector<BillStatement>> period_bills,
                              const std::map<UserId, SupplierId>& contracts) {
  std::map<UserId, RingValue> totals;
  for (const auto& period : period_bills)
    for (const BillStatement& bl : period) totals[bl.user_id] = totals[bl.user_id] + bl.amount.scaled;

  std::map<SupplierId, std::vector<std::pair<UserId, FixedPointMoney>>> out;
  for (const auto& [uid, total] : totals) {
    auto it = contracts.find(uid);
    if (it == contracts.end()) raise(Errc::UnknownUserId, "no contract for user " + std::to_string(uid));
    out[it->second].emplace_back(uid, FixedPointMoney{total});
  }
  return out;
}

}  // namespace lembill
