#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lembill/harness.hpp"

using namespace lembill;

TEST_CASE("generation is byte-identical under a fixed seed") {
  ScenarioParams p;
  p.n_users = 1000;
  p.n_zones = 10;
  p.n_periods = 2;
  Scenario a = generate_scenario(p, 1);
  Scenario b = generate_scenario(p, 1);
  CHECK(scenario_to_json(a) == scenario_to_json(b));
  Scenario c = generate_scenario(p, 2);
  CHECK(scenario_to_json(a) != scenario_to_json(c));
}

TEST_CASE("rerandomisation keeps the structure and replaces the values") {
  ScenarioParams p;
  p.n_users = 40;
  p.n_zones = 4;
  Scenario a = generate_scenario(p, 3);
  Scenario b = a;
  rerandomize_values(b, 999);
  CHECK(a.periods != b.periods);
  for (size_t i = 0; i < a.users.size(); ++i) {
    CHECK(a.users[i].zone == b.users[i].zone);
    CHECK(a.users[i].supplier == b.users[i].supplier);
  }
  CHECK(a.prices[0].tp.micro() == b.prices[0].tp.micro());
}

TEST_CASE("generated energies stay within the ring-safe bound") {
  ScenarioParams p;
  p.n_users = 5000;
  p.n_zones = 10;
  p.n_periods = 200;  // one million user-period samples
  p.bid_min_w = 1;
  p.bid_max_w = kMaxEnergyWh - 1000;
  p.deviation_spread_w = 1000;
  Scenario s = generate_scenario(p, 4);
  for (const auto& period : s.periods)
    for (const PeriodRecord& r : period) {
      REQUIRE(std::abs(r.m_w) <= kMaxEnergyWh);
      REQUIRE(std::abs(r.b_w) <= kMaxEnergyWh);
    }
}

TEST_CASE("zero activity produces all-zero inputs and bills") {
  ScenarioParams p;
  p.n_users = 30;
  p.n_zones = 3;
  p.activity_rate = 0.0;
  Scenario s = generate_scenario(p, 5);
  for (const PeriodRecord& r : s.periods[0]) {
    CHECK(r.active == 0);
    CHECK(r.m_w == 0);
    CHECK(r.b_w == 0);
  }
  auto bills = oracle_settle(s);
  for (const auto& period : bills)
    for (const BillStatement& bl : period) CHECK(bl.amount.micro() == 0);
}

TEST_CASE("parameter validation") {
  ScenarioParams p;
  p.n_users = 0;
  CHECK_THROWS_AS(generate_scenario(p, 1), ProtocolError);
  p.n_users = 10;
  p.activity_rate = 1.5;
  CHECK_THROWS_AS(generate_scenario(p, 1), ProtocolError);
  p.activity_rate = 0.5;
  p.bid_max_w = kMaxEnergyWh;
  p.deviation_spread_w = 1;
  CHECK_THROWS_AS(generate_scenario(p, 1), ProtocolError);
}

TEST_CASE("scenario files round trip") {
  ScenarioParams p;
  p.n_users = 25;
  p.n_zones = 5;
  p.n_periods = 3;
  Scenario a = generate_scenario(p, 6);
  Scenario b = scenario_from_json(scenario_to_json(a));
  CHECK(scenario_to_json(a) == scenario_to_json(b));
  CHECK_THROWS_AS(scenario_from_json("{\"schema\":\"other\"}"), ProtocolError);
}

TEST_CASE("verification pinpoints the first divergence") {
  ScenarioParams p;
  p.n_users = 12;
  p.n_zones = 2;
  p.n_periods = 2;
  Scenario s = generate_scenario(p, 7);

  auto oracle = oracle_settle(s);
  UserBills bills(oracle.size());
  for (size_t k = 0; k < oracle.size(); ++k)
    for (const BillStatement& bl : oracle[k]) bills[k].push_back(bl.amount.micro());
  auto totals_fp = aggregate_supplier_statements(oracle, s.contracts());
  SupplierTotals totals;
  for (const auto& [sid, entries] : totals_fp)
    for (const auto& [uid, amount] : entries) totals[sid].emplace_back(uid, amount.micro());

  CHECK(verify_against_oracle(s, bills, totals).pass);

  UserBills doctored = bills;
  doctored[1][4] += 1;
  VerifyVerdict v = verify_against_oracle(s, doctored, totals);
  REQUIRE_FALSE(v.pass);
  REQUIRE(v.first_divergence.has_value());
  CHECK(v.first_divergence->user == s.users[4].id);
  CHECK(v.first_divergence->period == 1);
  CHECK(v.first_divergence->actual_micro == v.first_divergence->expected_micro + 1);
}

TEST_CASE("results files round trip") {
  ScenarioParams p;
  p.n_users = 8;
  p.n_zones = 2;
  Scenario s = generate_scenario(p, 8);
  SessionConfig cfg;
  cfg.backend = Backend::Rep3;
  cfg.mode = CompareMode::RevealDeviations;
  SessionResult res = run_session(s, cfg);

  LoadedResults back = results_from_json(results_to_json(s, cfg, res), s);
  CHECK(back.bills == res.bills);
  CHECK(back.supplier_totals == res.supplier_totals);
  CHECK(back.backend == "rep3");
}

TEST_CASE("report rendering is pure and the column set is frozen") {
  BenchmarkReport report;
  report.rows.push_back(run_bench_cell(Backend::Rep3, CompareMode::Oblivious, 20, 2, 1, 9));
  CHECK(report.rows[0].verified);
  std::string csv1 = report_to_csv(report);
  std::string csv2 = report_to_csv(report);
  CHECK(csv1 == csv2);
  CHECK(report_to_json(report) == report_to_json(report));
  CHECK(csv1.rfind("backend,mode,n_users,n_zones,n_periods,seed,offline_s,online_s,"
                   "online_rounds,online_messages,online_bytes,offline_bytes,verified\n",
                   0) == 0);
}

TEST_CASE("benchmark rows carry reference annotations") {
  auto refs = reference_points();
  REQUIRE(refs.size() == 2);
  CHECK(refs[0].online_s == doctest::Approx(5.80));
  CHECK(refs[1].online_s == doctest::Approx(8.40));
  BenchmarkReport report;
  std::string j = report_to_json(report);
  CHECK(j.find("external_reference") != std::string::npos);
  CHECK(j.find("5.8") != std::string::npos);
}
