#pragma once

// Scenario-level verification and the benchmark suite: every timed cell is
// checked bit-exact against the clear billing model before its numbers are
// worth anything.

#include <optional>
#include <string>
#include <vector>

#include "lembill/session.hpp"

namespace lembill {

struct Divergence {
  UserId user = 0;
  uint32_t period = 0;
  int64_t expected_micro = 0;
  int64_t actual_micro = 0;
};

struct VerifyVerdict {
  bool pass = true;
  std::optional<Divergence> first_divergence;
  std::string detail;
};

// Bit-exact comparison of opened results against the clear settlement. An
// empty supplier map checks the per-period bills only (a session always
// produces supplier aggregates, but a user-side results file has none).
VerifyVerdict verify_against_oracle(const Scenario& scenario, const UserBills& bills,
                                    const SupplierTotals& supplier_totals);

struct BenchRow {
  std::string backend;
  std::string mode;
  uint32_t n_users = 0;
  uint32_t n_zones = 0;
  uint32_t n_periods = 0;
  uint64_t seed = 0;
  double offline_s = 0;
  double online_s = 0;
  uint64_t online_rounds = 0;
  uint64_t online_messages = 0;
  uint64_t online_bytes = 0;
  uint64_t offline_bytes = 0;
  bool verified = false;
  std::string note;
};

// Published timings of an MP-SPDZ-based run of the same protocol on a
// 16-core Xeon server, kept alongside our rows for orientation. Absolute
// numbers are hardware-specific; only the scaling shape is comparable.
struct ReferencePoint {
  std::string setting;
  uint32_t n_users;
  double online_s;
};

std::vector<ReferencePoint> reference_points();

struct BenchGrid {
  std::vector<Backend> backends{Backend::Rep3, Backend::Additive};
  std::vector<CompareMode> modes{CompareMode::Oblivious, CompareMode::RevealDeviations};
  std::vector<uint32_t> user_counts{1000, 2000, 3000, 4000, 5000};
  uint32_t n_zones = 10;
  uint32_t n_periods = 1;
  uint64_t seed = 1;
};

struct BenchmarkReport {
  std::vector<BenchRow> rows;
};

BenchRow run_bench_cell(Backend backend, CompareMode mode, uint32_t n_users, uint32_t n_zones,
                        uint32_t n_periods, uint64_t seed);

// Runs the grid cell by cell (sequentially, for clean timing); per-cell
// failures are recorded in the row and the suite continues.
BenchmarkReport run_benchmark_suite(const BenchGrid& grid);

// Pure renderings of a report; re-rendering the same report is
// byte-identical. The CSV column set is fixed:
// backend,mode,n_users,n_zones,n_periods,seed,offline_s,online_s,
// online_rounds,online_messages,online_bytes,offline_bytes,verified
std::string report_to_csv(const BenchmarkReport& report);
std::string report_to_json(const BenchmarkReport& report);

// Opened session outputs as a self-describing file, and back.
std::string results_to_json(const Scenario& scenario, const SessionConfig& cfg,
                            const SessionResult& result);

struct LoadedResults {
  std::string backend;
  std::string mode;
  UserBills bills;
  SupplierTotals supplier_totals;
};

LoadedResults results_from_json(const std::string& text, const Scenario& scenario);

}  // namespace lembill
