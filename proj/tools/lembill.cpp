// Command-line front end: scenario generation, secure settlement runs
// (in-process or as one role of a distributed deployment), verification
// against the clear billing model, and the benchmark suite.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lembill/harness.hpp"
#include "lembill/tcp_transport.hpp"

using namespace lembill;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

Backend parse_backend(const std::string& s) {
  if (s == "rep3" || s == "honest") return Backend::Rep3;
  if (s == "additive" || s == "dishonest") return Backend::Additive;
  throw CLI::ValidationError("backend must be rep3 or additive");
}

CompareMode parse_mode(const std::string& s) {
  if (s == "oblivious") return CompareMode::Oblivious;
  if (s == "reveal") return CompareMode::RevealDeviations;
  throw CLI::ValidationError("mode must be oblivious or reveal");
}

Role parse_role(const std::string& s) {
  for (int r = 0; r < kRoleCount; ++r)
    if (s == role_name(static_cast<Role>(r))) return static_cast<Role>(r);
  throw CLI::ValidationError("unknown role " + s);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

void print_metrics(const SessionMetrics& m) {
  std::cout << "offline: " << m.offline_ms() / 1000.0 << " s, " << m.offline_bytes() << " bytes\n"
            << "online:  " << m.online_ms() / 1000.0 << " s, " << m.online_rounds()
            << " rounds, " << m.online_messages() << " messages, " << m.online_bytes()
            << " bytes\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zone-based privacy-preserving billing for local energy markets"};
  app.require_subcommand(1);

  // -------- generate --------
  auto* gen = app.add_subcommand("generate", "generate a scenario file");
  ScenarioParams params;
  params.n_users = 100;
  params.n_zones = 10;
  uint64_t gen_seed = 1;
  std::string gen_out = "scenario.json";
  gen->add_option("--users", params.n_users, "number of users");
  gen->add_option("--zones", params.n_zones, "number of zones");
  gen->add_option("--periods", params.n_periods, "number of trading periods");
  gen->add_option("--suppliers", params.n_suppliers, "number of suppliers");
  gen->add_option("--activity", params.activity_rate, "probability a user is active in a period");
  gen->add_option("--bid-min", params.bid_min_w, "minimum bid magnitude (W)");
  gen->add_option("--bid-max", params.bid_max_w, "maximum bid magnitude (W)");
  gen->add_option("--spread", params.deviation_spread_w, "deviation spread around bids (W)");
  gen->add_option("--seller-fraction", params.seller_fraction, "fraction of active sellers");
  gen->add_option("--zone-rule", params.zone_rule, "round_robin or uniform");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("-o,--out", gen_out, "output path");

  // -------- run --------
  auto* run = app.add_subcommand("run", "run a secure settlement session");
  std::string run_scenario_path, run_backend = "rep3", run_mode = "oblivious";
  std::string run_transport = "memory", run_role_name, run_out, run_metrics_out;
  std::string run_endpoints_path;
  uint64_t run_seed = 1;
  uint16_t base_port = 28800;
  int timeout_ms = 120000;
  bool no_verify = false;
  run->add_option("--scenario", run_scenario_path, "scenario file")->required();
  run->add_option("--backend", run_backend, "rep3 (honest majority) or additive (dishonest majority)");
  run->add_option("--mode", run_mode, "oblivious or reveal");
  run->add_option("--seed", run_seed, "session randomness seed");
  run->add_option("--transport", run_transport, "memory or tcp");
  run->add_option("--role", run_role_name,
                  "run only this role over tcp (preproc, sm, lemo, cp1..cp3, users, suppliers)");
  run->add_option("--base-port", base_port,
                  "tcp base port; role k listens on base+k, LEMBILL_EP_<ROLE> overrides");
  run->add_option("--endpoints", run_endpoints_path,
                  "JSON file mapping role names to host:port, overrides --base-port");
  run->add_option("--timeout-ms", timeout_ms, "transport receive timeout");
  run->add_flag("--no-verify", no_verify, "skip the oracle check");
  run->add_option("-o,--out", run_out, "write opened results as JSON");
  run->add_option("--metrics-out", run_metrics_out, "write metrics summary as JSON");

  // -------- verify --------
  auto* ver = app.add_subcommand("verify", "check a results file against the billing model");
  std::string ver_scenario_path, ver_results_path;
  ver->add_option("--scenario", ver_scenario_path, "scenario file")->required();
  ver->add_option("--results", ver_results_path, "results file")->required();

  // -------- bench --------
  auto* bench = app.add_subcommand("bench", "run the benchmark grid");
  std::string bench_backends = "rep3,additive", bench_modes = "oblivious,reveal";
  std::string bench_users = "1000,2000,3000,4000,5000";
  std::string bench_csv = "benchmark.csv", bench_json = "benchmark.json";
  BenchGrid grid;
  bench->add_option("--backends", bench_backends, "comma-separated backend list");
  bench->add_option("--modes", bench_modes, "comma-separated mode list");
  bench->add_option("--users", bench_users, "comma-separated user counts");
  bench->add_option("--zones", grid.n_zones, "zones per cell");
  bench->add_option("--periods", grid.n_periods, "periods per cell");
  bench->add_option("--seed", grid.seed, "scenario seed");
  bench->add_option("--csv", bench_csv, "CSV output path");
  bench->add_option("--json", bench_json, "JSON output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      Scenario s = generate_scenario(params, gen_seed);
      spit(gen_out, scenario_to_json(s));
      std::cout << "wrote " << gen_out << " (" << params.n_users << " users, " << params.n_zones
                << " zones, " << params.n_periods << " periods)\n";
      return 0;
    }

    if (*run) {
      Scenario scenario = scenario_from_json(slurp(run_scenario_path));
      SessionConfig cfg;
      cfg.backend = parse_backend(run_backend);
      cfg.mode = parse_mode(run_mode);
      cfg.seed = run_seed;
      cfg.timeout_ms = timeout_ms;

      auto resolve_endpoints = [&] {
        EndpointMap eps = local_endpoints(base_port);
        if (!run_endpoints_path.empty()) apply_endpoint_file(eps, slurp(run_endpoints_path));
        apply_endpoint_env_overrides(eps);
        return eps;
      };

      if (!run_role_name.empty()) {
        if (run_transport != "tcp")
          throw CLI::ValidationError("--role requires --transport tcp");
        EndpointMap eps = resolve_endpoints();
        Role role = parse_role(run_role_name);
        auto ep = make_tcp_endpoint(role, eps, timeout_ms);
        RoleRun out = run_role(role, scenario, cfg, *ep);
        if (out.user_bills && !run_out.empty()) {
          SessionResult partial;
          partial.bills = *out.user_bills;
          spit(run_out, results_to_json(scenario, cfg, partial));
        }
        std::cout << role_name(role) << ": done\n";
        return 0;
      }

      SessionResult res;
      if (run_transport == "tcp") {
        EndpointMap eps = resolve_endpoints();
        res = run_session_over(scenario, cfg,
                               [&](Role r) { return make_tcp_endpoint(r, eps, timeout_ms); });
      } else if (run_transport == "memory") {
        res = run_session(scenario, cfg);
      } else {
        throw CLI::ValidationError("transport must be memory or tcp");
      }

      print_metrics(res.metrics);
      if (!run_out.empty()) spit(run_out, results_to_json(scenario, cfg, res));
      if (!run_metrics_out.empty()) {
        BenchmarkReport one;
        BenchRow row;
        row.backend = backend_name(cfg.backend);
        row.mode = mode_name(cfg.mode);
        row.n_users = scenario.params.n_users;
        row.n_zones = scenario.params.n_zones;
        row.n_periods = scenario.params.n_periods;
        row.seed = cfg.seed;
        row.offline_s = res.metrics.offline_ms() / 1000.0;
        row.online_s = res.metrics.online_ms() / 1000.0;
        row.online_rounds = res.metrics.online_rounds();
        row.online_messages = res.metrics.online_messages();
        row.online_bytes = res.metrics.online_bytes();
        row.offline_bytes = res.metrics.offline_bytes();
        row.verified = true;
        one.rows.push_back(row);
        spit(run_metrics_out, report_to_json(one));
      }
      if (!no_verify) {
        VerifyVerdict v = verify_against_oracle(scenario, res.bills, res.supplier_totals);
        if (!v.pass) {
          std::cout << "verification: FAIL (" << v.detail << ")\n";
          return 1;
        }
        std::cout << "verification: pass (bit-exact against the clear model)\n";
      }
      return 0;
    }

    if (*ver) {
      Scenario scenario = scenario_from_json(slurp(ver_scenario_path));
      LoadedResults res = results_from_json(slurp(ver_results_path), scenario);
      VerifyVerdict v = verify_against_oracle(scenario, res.bills, res.supplier_totals);
      if (!v.pass) {
        std::cout << "FAIL: " << v.detail << "\n";
        return 1;
      }
      std::cout << "pass\n";
      return 0;
    }

    if (*bench) {
      grid.backends.clear();
      for (const std::string& b : split_csv(bench_backends)) grid.backends.push_back(parse_backend(b));
      grid.modes.clear();
      for (const std::string& m : split_csv(bench_modes)) grid.modes.push_back(parse_mode(m));
      grid.user_counts.clear();
      for (const std::string& n : split_csv(bench_users))
        grid.user_counts.push_back(static_cast<uint32_t>(std::stoul(n)));

      BenchmarkReport report = run_benchmark_suite(grid);
      spit(bench_csv, report_to_csv(report));
      spit(bench_json, report_to_json(report));
      bool all_ok = true;
      for (const BenchRow& r : report.rows) {
        std::cout << r.backend << "/" << r.mode << " users=" << r.n_users
                  << " offline=" << r.offline_s << "s online=" << r.online_s
                  << "s rounds=" << r.online_rounds << " " << (r.verified ? "pass" : "FAIL")
                  << "\n";
        all_ok = all_ok && r.verified;
      }
      std::cout << "wrote " << bench_csv << " and " << bench_json << "\n";
      return all_ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
