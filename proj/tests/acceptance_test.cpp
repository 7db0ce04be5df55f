// Acceptance suite: end-to-end checks of the protocol artifact, one
// pass/fail line per criterion. Tolerances are pinned in the assertions.

#include <algorithm>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lembill/engine.hpp"
#include "lembill/harness.hpp"
#include "lembill/session.hpp"
#include "test_util.hpp"

using namespace lembill;
using namespace lembill::testutil;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail = "") {
  std::printf("[%s] criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!pass) failures += 1;
}

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

Scenario sized_scenario(uint32_t users, uint32_t zones, uint32_t periods, uint64_t seed,
                        double activity = 0.85) {
  ScenarioParams p;
  p.n_users = users;
  p.n_zones = zones;
  p.n_periods = periods;
  p.activity_rate = activity;
  return generate_scenario(p, seed);
}

SessionConfig make_config(Backend b, CompareMode m, uint64_t seed) {
  SessionConfig cfg;
  cfg.backend = b;
  cfg.mode = m;
  cfg.seed = seed;
  return cfg;
}

const Backend kBackends[2] = {Backend::Rep3, Backend::Additive};
const CompareMode kModes[2] = {CompareMode::Oblivious, CompareMode::RevealDeviations};

// Shared across criteria 1, 7 and 8: every session in the suite feeds the
// open-value and routing audits.
size_t audited_sessions = 0;
size_t audit_violations = 0;

void note_audits(const SessionResult& res) {
  audited_sessions += 1;
  audit_violations += res.open_violations.size() + res.routing_violations.size();
}

// ---- criterion 1: oracle equivalence ----

void criterion_oracle_equivalence() {
  Check c;
  std::mt19937_64 rng(20260810);
  int runs = 0;
  for (Backend b : kBackends) {
    for (CompareMode m : kModes) {
      for (int i = 0; i < 50 && c.ok; ++i) {
        uint32_t users, zones, periods;
        if (i == 49) {
          users = 1000;
          zones = 10;
          periods = 1;
        } else {
          users = 3 + static_cast<uint32_t>(rng() % 118);
          zones = 1 + static_cast<uint32_t>(rng() % 6);
          periods = 1 + static_cast<uint32_t>(rng() % 3);
        }
        Scenario s = sized_scenario(users, zones, periods, rng());
        SessionResult res = run_session(s, make_config(b, m, rng()));
        note_audits(res);
        VerifyVerdict v = verify_against_oracle(s, res.bills, res.supplier_totals);
        c.expect(v.pass, std::string(backend_name(b)) + "/" + mode_name(m) + " users=" +
                             std::to_string(users) + ": " + v.detail);
        runs += 1;
      }
    }
  }
  report(1, "oracle equivalence, 50 scenarios per configuration, bit-exact", c.ok,
         c.ok ? std::to_string(runs) + " sessions, zero divergences" : c.detail);
}

// ---- criterion 2: algorithm unit fidelity ----

void criterion_unit_fidelity() {
  Check c;

  // Deviations aggregation.
  std::vector<UserRecord> zone_users{
      {1, 0, 0, 1, RingValue::from_signed(120), RingValue::from_signed(100), 1},
      {2, 0, 0, 0, RingValue::from_signed(80), RingValue::from_signed(90), 1}};
  ZoneAggregate zn = aggregate_zone(zone_users);
  c.expect(zn.deviations[0].signed_value() == 20 && zn.deviations[1].signed_value() == -10,
           "per-user deviations");
  c.expect(zn.t.signed_value() == 10 && zn.p == 1 && zn.c == 1, "zone totals");

  // Weight computation.
  std::vector<ZoneAggregate> zones(3);
  zones[0].t = RingValue::from_signed(50);
  zones[1].t = RingValue::from_signed(-30);
  zones[2].t = RingValue::from_signed(10);
  GlobalDeviation g = compute_weight(zones);
  c.expect(g.total == 30 && g.zd_over == 60 && g.w_num * 2 == g.w_den, "W = 1/2");

  // Coefficient quantization.
  c.expect(quantize_coefficient(30, 60).value.micro() == 500000, "T/zd_over quantization");
  c.expect(quantize_coefficient(1, 3).value.micro() == 333333, "round half away from zero");

  // Individual billing, base terms.
  PriceSchedule pr;
  pr.tp = FixedPointMoney::from_micro(100000);
  pr.fit = FixedPointMoney::from_micro(40000);
  pr.rp = FixedPointMoney::from_micro(180000);
  pr.zone_fees[0] = {FixedPointMoney::from_micro(10000), FixedPointMoney::from_micro(20000)};
  GlobalDeviation balanced;  // T = 0
  UserRecord seller{1, 0, 0, 1, RingValue::from_signed(100), RingValue::from_signed(100), 1};
  ZoneAggregate sz = aggregate_zone(std::vector<UserRecord>{seller});
  c.expect(bill_user(seller, sz, balanced, pr).amount.micro() == 9'000'000, "seller base bill");
  UserRecord buyer{2, 0, 0, 0, RingValue::from_signed(-200), RingValue::from_signed(-200), 1};
  ZoneAggregate bz = aggregate_zone(std::vector<UserRecord>{buyer});
  c.expect(bill_user(buyer, bz, balanced, pr).amount.micro() == -24'000'000, "buyer base bill");

  // T = 0 disables both deviation branches across a whole period.
  {
    std::vector<UserRecord> users{
        {1, 0, 0, 1, RingValue::from_signed(150), RingValue::from_signed(100), 1},
        {2, 0, 0, 0, RingValue::from_signed(-80), RingValue::from_signed(-30), 1}};
    auto bills = settle_period(users, pr);
    c.expect(bills[0].amount.micro() == 150 * (100000 - 10000), "T=0 seller base only");
    c.expect(bills[1].amount.micro() == -80 * (100000 + 20000), "T=0 buyer base only");
  }

  // Zones without positive deviation receive nothing while T > 0.
  {
    PriceSchedule flat = pr;
    flat.zone_fees[0] = {FixedPointMoney{}, FixedPointMoney{}};
    flat.zone_fees[1] = {FixedPointMoney{}, FixedPointMoney{}};
    std::vector<UserRecord> users{
        {1, 0, 0, 1, RingValue::from_signed(180), RingValue::from_signed(100), 1},
        {2, 0, 1, 1, RingValue::from_signed(90), RingValue::from_signed(120), 1},
        {3, 0, 1, 0, RingValue::from_signed(-60), RingValue::from_signed(-50), 1}};
    auto bills = settle_period(users, flat);
    c.expect(bills[1].amount.micro() == 90 * 100000, "undersupplying zone untouched");
    c.expect(bills[2].amount.micro() == -60 * 100000, "undersupplying zone untouched");
    c.expect(bills[0].amount.micro() < 180 * 100000, "oversupplying prosumer adjusted");
  }

  // The deviation branch itself.
  {
    PriceSchedule flat = pr;
    flat.zone_fees[0] = {FixedPointMoney{}, FixedPointMoney{}};
    UserRecord u{1, 0, 0, 1, RingValue::from_signed(120), RingValue::from_signed(100), 1};
    ZoneAggregate z;
    z.t = RingValue::from_signed(10);
    z.p = 1;
    GlobalDeviation gd;
    gd.total = 30;
    gd.zd_over = 60;
    gd.w_num = 30;
    gd.w_den = 60;
    gd.w_defined = true;
    c.expect(zone_coefficients(z, gd, flat).over.micro() == -300000, "zone coefficient -0.30");
    c.expect(bill_user(u, z, gd, flat).amount.micro() == 12'000'000 - 300'000,
             "adjusted seller bill");
  }

  report(2, "billing algorithms reproduce the hand-derived examples exactly", c.ok, c.detail);
}

// ---- criterion 3: comparison gadget ----

void criterion_comparison_gadget() {
  Check c;
  for (Backend b : kBackends) {
    std::vector<uint64_t> values;
    for (int64_t v = -1000; v <= 1000; ++v) values.push_back(static_cast<uint64_t>(v));
    std::mt19937_64 rng(0xc0ffee);
    for (int i = 0; i < 10000; ++i) values.push_back(rng());

    size_t n = values.size();
    std::mt19937_64 share_rng(0xfeed);
    std::array<std::vector<ArithShare>, 3> vsh;
    for (auto& v : vsh) v.resize(n);
    for (size_t k = 0; k < n; ++k) {
      auto sv = share_arith(b, values[k], share_rng);
      for (int i = 0; i < 3; ++i) vsh[i][k] = sv[i];
    }
    PreprocessingBudget budget;
    budget.masks = n;
    if (b == Backend::Additive) budget.bit_triples = uint64_t(comparison_and_count()) * n;

    auto results = run_parties(b, budget, 0xabc, [&](PartyEngine& eng) {
      SignBits bits = eng.compare_sign(vsh[eng.party()]);
      auto gt = eng.open_bits(bits.gt, OpenTag::MaskedCompare);
      auto lt = eng.open_bits(bits.lt, OpenTag::MaskedCompare);
      return std::pair(gt, lt);
    });
    size_t mismatches = 0;
    for (size_t k = 0; k < n; ++k) {
      int64_t sv = static_cast<int64_t>(values[k]);
      if (results[0].first[k] != (sv > 0 ? 1 : 0)) mismatches += 1;
      if (results[0].second[k] != (sv < 0 ? 1 : 0)) mismatches += 1;
    }
    c.expect(mismatches == 0, std::string(backend_name(b)) + ": " +
                                  std::to_string(mismatches) + " mismatches over " +
                                  std::to_string(n) + " values");
  }
  report(3, "oblivious sign test matches the clear oracle, exhaustive and random", c.ok,
         c.ok ? "22002 values per backend, zero mismatches" : c.detail);
}

// ---- criterion 4: transcript shape ----

void criterion_transcript_shape() {
  Check c;
  for (Backend b : kBackends) {
    Scenario s1 = sized_scenario(40, 4, 1, 9001);
    Scenario s2 = s1;
    rerandomize_values(s2, 40402);
    SessionConfig cfg = make_config(b, CompareMode::Oblivious, 5);
    SessionResult r1 = run_session(s1, cfg);
    SessionResult r2 = run_session(s2, cfg);
    note_audits(r1);
    note_audits(r2);

    for (int i = 0; i < 3; ++i) {
      Role role = computing_party(i);
      std::vector<std::pair<Role, uint32_t>> a, bshape;
      for (const ShapeEntry& e : r1.metrics.traffic.at(role).shape)
        if (e.phase == 4) a.emplace_back(e.to, e.bytes);
      for (const ShapeEntry& e : r2.metrics.traffic.at(role).shape)
        if (e.phase == 4) bshape.emplace_back(e.to, e.bytes);
      c.expect(!a.empty(), "phase 4 transcript empty");
      c.expect(a == bshape, std::string(backend_name(b)) + " cp" + std::to_string(i + 1) +
                                ": phase-4 transcript differs across input values");
    }
  }
  report(4, "phase-4 transcript shape is identical across input values", c.ok, c.detail);
}

// ---- criterion 5: scaling shape ----

void criterion_scaling() {
  Check c;
  std::string summary;
  for (Backend b : kBackends) {
    auto run_cell = [&](CompareMode m, uint32_t users) {
      Scenario s = sized_scenario(users, 10, 1, 7000 + users);
      SessionResult res = run_session(s, make_config(b, m, 7));
      note_audits(res);
      VerifyVerdict v = verify_against_oracle(s, res.bills, res.supplier_totals);
      c.expect(v.pass, "scaling cell failed verification");
      return res;
    };

    // Round counts, oblivious, 1000 vs 2000 users: within [1.9, 2.1].
    uint64_t rounds_obl_1000 = run_cell(CompareMode::Oblivious, 1000).metrics.online_rounds();
    uint64_t rounds_obl_2000 = run_cell(CompareMode::Oblivious, 2000).metrics.online_rounds();
    double round_ratio = double(rounds_obl_2000) / double(rounds_obl_1000);
    c.expect(round_ratio >= 1.9 && round_ratio <= 2.1,
             std::string(backend_name(b)) + ": round ratio " + std::to_string(round_ratio));

    // Reveal mode strictly cheaper in rounds at every measured size.
    uint64_t rounds_rev_1000 = run_cell(CompareMode::RevealDeviations, 1000).metrics.online_rounds();
    uint64_t rounds_rev_2000 = run_cell(CompareMode::RevealDeviations, 2000).metrics.online_rounds();
    c.expect(rounds_rev_1000 < rounds_obl_1000 && rounds_rev_2000 < rounds_obl_2000,
             std::string(backend_name(b)) + ": reveal mode not cheaper");

    // Online time, oblivious, 2000 vs 4000 users (medians of 3): [1.6, 2.4].
    auto median_time = [&](uint32_t users) {
      std::vector<double> t;
      for (int i = 0; i < 3; ++i)
        t.push_back(run_cell(CompareMode::Oblivious, users).metrics.online_ms());
      std::sort(t.begin(), t.end());
      return t[1];
    };
    double t2000 = median_time(2000);
    double t4000 = median_time(4000);
    double time_ratio = t4000 / t2000;
    c.expect(time_ratio >= 1.6 && time_ratio <= 2.4,
             std::string(backend_name(b)) + ": time ratio " + std::to_string(time_ratio));

    summary += std::string(backend_name(b)) + " rounds " + std::to_string(rounds_obl_1000) + "->" +
               std::to_string(rounds_obl_2000) + " (x" + std::to_string(round_ratio).substr(0, 5) +
               "), reveal " + std::to_string(rounds_rev_1000) + "/" +
               std::to_string(rounds_rev_2000) + ", time x" +
               std::to_string(time_ratio).substr(0, 5) + "; ";
  }
  report(5, "linear online scaling and cheaper revealed comparisons", c.ok,
         c.ok ? summary : c.detail);
}

// ---- criterion 6: desk-scale performance ----

void criterion_performance() {
  Check c;
  Scenario s = sized_scenario(5000, 10, 1, 86);
  SessionConfig cfg = make_config(Backend::Rep3, CompareMode::Oblivious, 6);
  SessionResult res = run_session(s, cfg);
  note_audits(res);
  VerifyVerdict v = verify_against_oracle(s, res.bills, res.supplier_totals);
  c.expect(v.pass, "verification failed at 5000 users");
  double online_s = res.metrics.online_ms() / 1000.0;
  c.expect(online_s < 60.0, "online phase took " + std::to_string(online_s) + " s");
  report(6, "5000 users / 10 zones / honest-majority online phase under 60 s", c.ok,
         "online " + std::to_string(online_s) + " s, offline " +
             std::to_string(res.metrics.offline_ms() / 1000.0) + " s, " +
             std::to_string(res.metrics.online_rounds()) + " rounds");
}

// ---- criterion 7: privacy sanity ----

void criterion_privacy() {
  Check c;
  constexpr int kSamples = 10000;
  const double critical = chi_square_critical_99(255);

  for (Backend b : kBackends) {
    for (uint64_t secret : {uint64_t(0), uint64_t(123456789)}) {
      std::mt19937_64 rng(0x600d5eed);
      std::vector<std::vector<uint32_t>> lanes(3 * 16, std::vector<uint32_t>(256, 0));
      for (int s = 0; s < kSamples; ++s) {
        auto sh = share_arith(b, secret, rng);
        for (int view = 0; view < 3; ++view) {
          uint64_t w0 = sh[view].c[0];
          uint64_t w1 = b == Backend::Rep3 ? sh[view].c[1] : sh[next_party(view)].c[0];
          for (int byte = 0; byte < 8; ++byte) {
            lanes[view * 16 + byte][(w0 >> (8 * byte)) & 0xff] += 1;
            lanes[view * 16 + 8 + byte][(w1 >> (8 * byte)) & 0xff] += 1;
          }
        }
      }
      for (size_t lane = 0; lane < lanes.size(); ++lane) {
        double stat = chi_square_bytes(lanes[lane], kSamples);
        c.expect(stat < critical, std::string(backend_name(b)) + " lane " +
                                      std::to_string(lane) + " chi2 " + std::to_string(stat) +
                                      " >= " + std::to_string(critical));
      }
    }
  }

  // The open audit over every session this suite ran.
  c.expect(audited_sessions > 0, "no sessions audited");
  c.expect(audit_violations == 0, std::to_string(audit_violations) + " audit violations");
  report(7, "share views pass chi-square uniformity; opened values match the allowed set", c.ok,
         c.ok ? std::to_string(audited_sessions) + " sessions audited" : c.detail);
}

// ---- criterion 8: fault injection ----

void criterion_fault_injection() {
  Check c;
  Scenario s = sized_scenario(8, 2, 1, 88);
  SessionConfig cfg = make_config(Backend::Rep3, CompareMode::Oblivious, 8);
  cfg.fault.corrupt_phase3_share = true;
  cfg.fault.party = 2;
  cfg.fault.zone_index = 1;
  cfg.fault.delta = 7;
  bool caught = false;
  try {
    run_session(s, cfg);
  } catch (const ProtocolError& e) {
    caught = e.code() == Errc::OpenDisagreement;
  }
  c.expect(caught, "corrupted phase-3 share was not flagged");

  // Routing misdelivery is rejected by the audit (and never occurred above).
  std::map<UserId, SupplierId> contracts{{1, 10}, {2, 20}};
  SupplierTotals bad;
  bad[20].emplace_back(1, 42);
  c.expect(!audit_supplier_routing(bad, contracts).empty(), "routing audit missed a violation");
  c.expect(audit_violations == 0, "routing violations observed in the suite");
  report(8, "corrupted opening raises OpenDisagreement; routing audit stays clean", c.ok,
         c.detail);
}

}  // namespace

int main() {
  std::printf("acceptance suite: zone-based secure billing artifact\n");
  criterion_oracle_equivalence();
  criterion_unit_fidelity();
  criterion_comparison_gadget();
  criterion_transcript_shape();
  criterion_scaling();
  criterion_performance();
  criterion_privacy();
  criterion_fault_injection();
  if (failures == 0)
    std::printf("all 8 criteria passed\n");
  else
    std::printf("%d criteria FAILED\n", failures);
  return failures == 0 ? 0 : 1;
}
