#include "lembill/harness.hpp"

#include <algorithm>
#include <cstdio>

#include "json.hpp"

namespace lembill {

using nlohmann::json;

VerifyVerdict verify_against_oracle(const Scenario& scenario, const UserBills& bills,
                                    const SupplierTotals& supplier_totals) {
  VerifyVerdict v;
  auto oracle = oracle_settle(scenario);

  if (bills.size() != oracle.size()) {
    v.pass = false;
    v.detail = "period count mismatch";
    return v;
  }
  for (uint32_t k = 0; k < oracle.size(); ++k) {
    if (bills[k].size() != oracle[k].size()) {
      v.pass = false;
      v.detail = "user count mismatch in period " + std::to_string(k);
      return v;
    }
    for (uint32_t i = 0; i < oracle[k].size(); ++i) {
      int64_t expected = oracle[k][i].amount.micro();
      if (bills[k][i] != expected) {
        v.pass = false;
        v.first_divergence = Divergence{oracle[k][i].user_id, k, expected, bills[k][i]};
        v.detail = "user " + std::to_string(oracle[k][i].user_id) + " period " +
                   std::to_string(k) + ": expected " + std::to_string(expected) + " got " +
                   std::to_string(bills[k][i]);
        return v;
      }
    }
  }

  if (supplier_totals.empty()) {
    // Bills-only results (e.g. collected from the user output role alone).
    v.detail = "bills only";
    return v;
  }
  auto contracts = scenario.contracts();
  auto expected_totals = aggregate_supplier_statements(oracle, contracts);
  for (auto& [sid, entries] : expected_totals)
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  SupplierTotals actual = supplier_totals;
  for (auto& [sid, entries] : actual)
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

  for (const auto& [sid, entries] : expected_totals) {
    auto it = actual.find(sid);
    if (it == actual.end()) {
      v.pass = false;
      v.detail = "missing supplier " + std::to_string(sid);
      return v;
    }
    if (it->second.size() != entries.size()) {
      v.pass = false;
      v.detail = "customer set mismatch for supplier " + std::to_string(sid);
      return v;
    }
    for (size_t i = 0; i < entries.size(); ++i) {
      if (it->second[i].first != entries[i].first ||
          it->second[i].second != entries[i].second.micro()) {
        v.pass = false;
        v.detail = "supplier " + std::to_string(sid) + " aggregate mismatch for user " +
                   std::to_string(entries[i].first);
        return v;
      }
    }
  }
  if (actual.size() != expected_totals.size()) {
    v.pass = false;
    v.detail = "extra supplier entries";
  }
  return v;
}

std::vector<ReferencePoint> reference_points() {
  return {
      {"honest_majority_passive_online", 5000, 5.80},
      {"dishonest_majority_active_online", 5000, 8.40},
  };
}

BenchRow run_bench_cell(Backend backend, CompareMode mode, uint32_t n_users, uint32_t n_zones,
                        uint32_t n_periods, uint64_t seed) {
  BenchRow row;
  row.backend = backend_name(backend);
  row.mode = mode_name(mode);
  row.n_users = n_users;
  row.n_zones = n_zones;
  row.n_periods = n_periods;
  row.seed = seed;

  ScenarioParams params;
  params.n_users = n_users;
  params.n_zones = n_zones;
  params.n_periods = n_periods;
  Scenario scenario = generate_scenario(params, seed);

  SessionConfig cfg;
  cfg.backend = backend;
  cfg.mode = mode;
  cfg.seed = seed;

  try {
    SessionResult res = run_session(scenario, cfg);
    row.offline_s = res.metrics.offline_ms() / 1000.0;
    row.online_s = res.metrics.online_ms() / 1000.0;
    row.online_rounds = res.metrics.online_rounds();
    row.online_messages = res.metrics.online_messages();
    row.online_bytes = res.metrics.online_bytes();
    row.offline_bytes = res.metrics.offline_bytes();
    VerifyVerdict v = verify_against_oracle(scenario, res.bills, res.supplier_totals);
    row.verified = v.pass;
    if (!v.pass) row.note = v.detail;
    if (!res.open_violations.empty()) {
      row.verified = false;
      row.note += " open-audit: " + res.open_violations.front();
    }
    if (!res.routing_violations.empty()) {
      row.verified = false;
      row.note += " routing: " + res.routing_violations.front();
    }
  } catch (const std::exception& e) {
    row.verified = false;
    row.note = e.what();
  }
  return row;
}

BenchmarkReport run_benchmark_suite(const BenchGrid& grid) {
  BenchmarkReport report;
  for (Backend b : grid.backends)
    for (CompareMode m : grid.modes)
      for (uint32_t n : grid.user_counts)
        report.rows.push_back(run_bench_cell(b, m, n, grid.n_zones, grid.n_periods, grid.seed));
  return report;
}

namespace {
std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}
}  // namespace

std::string report_to_csv(const BenchmarkReport& report) {
  std::string out =
      "backend,mode,n_users,n_zones,n_periods,seed,offline_s,online_s,"
      "online_rounds,online_messages,online_bytes,offline_bytes,verified\n";
  for (const BenchRow& r : report.rows) {
    out += r.backend + "," + r.mode + "," + std::to_string(r.n_users) + "," +
           std::to_string(r.n_zones) + "," + std::to_string(r.n_periods) + "," +
           std::to_string(r.seed) + "," + fixed3(r.offline_s) + "," + fixed3(r.online_s) + "," +
           std::to_string(r.online_rounds) + "," + std::to_string(r.online_messages) + "," +
           std::to_string(r.online_bytes) + "," + std::to_string(r.offline_bytes) + "," +
           (r.verified ? "pass" : "FAIL") + "\n";
  }
  return out;
}

std::string report_to_json(const BenchmarkReport& report) {
  json j;
  j["schema"] = "lembill-benchmark";
  j["version"] = 1;
  j["rows"] = json::array();
  for (const BenchRow& r : report.rows) {
    j["rows"].push_back({{"backend", r.backend},
                         {"mode", r.mode},
                         {"n_users", r.n_users},
                         {"n_zones", r.n_zones},
                         {"n_periods", r.n_periods},
                         {"seed", r.seed},
                         {"offline_s", r.offline_s},
                         {"online_s", r.online_s},
                         {"online_rounds", r.online_rounds},
                         {"online_messages", r.online_messages},
                         {"online_bytes", r.online_bytes},
                         {"offline_bytes", r.offline_bytes},
                         {"verified", r.verified},
                         {"note", r.note}});
  }
  j["inputs"] = "synthetic generator, uniform bids with uniform deviation spread";
  j["external_reference"] = json::array();
  for (const ReferencePoint& p : reference_points())
    j["external_reference"].push_back({{"setting", p.setting},
                                       {"n_users", p.n_users},
                                       {"online_s", p.online_s},
                                       {"source", "MP-SPDZ implementation on a 16-core Xeon server"}});
  return j.dump(1);
}

std::string results_to_json(const Scenario& scenario, const SessionConfig& cfg,
                            const SessionResult& result) {
  json j;
  j["schema"] = "lembill-results";
  j["version"] = 1;
  j["backend"] = backend_name(cfg.backend);
  j["mode"] = mode_name(cfg.mode);
  j["seed"] = cfg.seed;
  j["bills"] = json::array();
  for (uint32_t k = 0; k < result.bills.size(); ++k)
    for (uint32_t i = 0; i < result.bills[k].size(); ++i)
      j["bills"].push_back(
          {{"period", k}, {"user", scenario.users[i].id}, {"micro", result.bills[k][i]}});
  j["supplier_totals"] = json::array();
  for (const auto& [sid, entries] : result.supplier_totals)
    for (const auto& [uid, micro] : entries)
      j["supplier_totals"].push_back({{"supplier", sid}, {"user", uid}, {"micro", micro}});
  j["metrics"] = {{"offline_s", result.metrics.offline_ms() / 1000.0},
                  {"online_s", result.metrics.online_ms() / 1000.0},
                  {"online_rounds", result.metrics.online_rounds()},
                  {"online_messages", result.metrics.online_messages()},
                  {"online_bytes", result.metrics.online_bytes()},
                  {"offline_bytes", result.metrics.offline_bytes()}};
  return j.dump(1);
}

LoadedResults results_from_json(const std::string& text, const Scenario& scenario) {
  json j = json::parse(text);
  if (j.value("schema", "") != "lembill-results")
    raise(Errc::InvalidParams, "not a lembill results file");
  LoadedResults out;
  out.backend = j.value("backend", "");
  out.mode = j.value("mode", "");

  std::map<UserId, uint32_t> index_of;
  for (uint32_t i = 0; i < scenario.users.size(); ++i) index_of[scenario.users[i].id] = i;

  out.bills.assign(scenario.params.n_periods, std::vector<int64_t>(scenario.params.n_users, 0));
  for (const json& b : j.at("bills")) {
    uint32_t k = b.at("period").get<uint32_t>();
    UserId uid = b.at("user").get<UserId>();
    auto it = index_of.find(uid);
    if (k >= out.bills.size() || it == index_of.end())
      raise(Errc::InvalidParams, "results do not match the scenario");
    out.bills[k][it->second] = b.at("micro").get<int64_t>();
  }
  for (const json& t : j.at("supplier_totals"))
    out.supplier_totals[t.at("supplier").get<SupplierId>()].emplace_back(
        t.at("user").get<UserId>(), t.at("micro").get<int64_t>());
  return out;
}

}  // namespace lembill
