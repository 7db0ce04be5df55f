#pragma once

// Five-phase protocol runtime wiring all roles together:
//
//   1. input distribution   smart-meter and market-operator dealers split
//                           readings, bids and seller flags into shares;
//                           inactive users travel as zero shares
//   2. zone aggregation     local-only evaluation of per-zone deviations
//                           and prosumer/consumer counts (zero rounds)
//   3. zonal weight         zone tuples opened with a cross-check, weight
//                           and per-zone coefficients computed identically
//                           at every computing party
//   4. individual billing   base bill plus deviation term on shares; the
//                           deviation gate runs either as an oblivious sign
//                           test or against revealed deviations
//   5. result distribution  per-period bills to the user output party,
//                           per-customer aggregates to the supplier output
//                           party, routed by contracted supplier
//
// In oblivious mode phase 4 executes an identically shaped subcircuit for
// every user, whatever the data, so the phase-4 transcript is a function of
// (N_u, N_z, N_k, backend) alone.

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lembill/engine.hpp"
#include "lembill/scenario.hpp"
#include "lembill/transport.hpp"

namespace lembill {

enum class CompareMode : uint8_t {
  Oblivious,         // sign tests on shares, nothing individual is opened
  RevealDeviations,  // per-user deviations opened, comparisons in clear
};

const char* mode_name(CompareMode m);

// Test instrumentation: corrupt one component of one zone-total share at
// one computing party just before the phase-3 opening.
struct FaultPlan {
  bool corrupt_phase3_share = false;
  int party = 0;
  uint32_t zone_index = 0;
  uint64_t delta = 1;
};

struct SessionConfig {
  Backend backend = Backend::Rep3;
  CompareMode mode = CompareMode::Oblivious;
  uint64_t seed = 1;
  int timeout_ms = 120000;
  // Channels are assumed private and authentic (deployments would wrap the
  // transport in TLS); kept explicit so the assumption is visible in configs.
  bool assume_authenticated_channels = true;
  FaultPlan fault;
};

// The protocol-visible slice of a scenario: identities, zone and supplier
// assignment, prices and counts. Computing parties see only this; private
// values stay with the dealers.
struct PublicSetup {
  ScenarioParams params;
  std::vector<UserMeta> users;
  std::vector<PriceSchedule> prices;
};

PublicSetup public_setup(const Scenario& s);

PreprocessingBudget session_budget(const PublicSetup& setup, Backend backend, CompareMode mode);

// Joined per-user tuple held by one computing party after phase 1.
struct UserTupleShares {
  UserId id = 0;
  SupplierId supplier = 0;
  ZoneId zone = 0;
  ArithShare d, m, b;
};

struct SmInputRecord {
  UserId id;
  SupplierId supplier;
  ZoneId zone;
  ArithShare m;
};

struct LemoInputRecord {
  UserId id;
  ArithShare d, b;
};

// Combines the two dealers' tuple streams into one per-user tuple, aligned
// to the setup's user order. Raises DuplicateUserId / UnknownUserId /
// UnknownZone on join-integrity violations.
std::vector<UserTupleShares> join_input_tuples(std::span<const SmInputRecord> sm,
                                               std::span<const LemoInputRecord> lemo,
                                               const PublicSetup& setup);

// ---- results and accounting ----

using UserBills = std::vector<std::vector<int64_t>>;  // [period][user index], micro
using SupplierTotals = std::map<SupplierId, std::vector<std::pair<UserId, int64_t>>>;

struct RoleTraffic {
  std::map<uint8_t, PhaseTraffic> sent;
  std::vector<ShapeEntry> shape;
};

struct SessionMetrics {
  std::array<std::map<uint8_t, uint64_t>, 3> cp_rounds;   // phase -> rounds
  std::array<std::map<uint8_t, double>, 3> cp_wall_ms;    // phase -> wall
  std::map<Role, RoleTraffic> traffic;                    // sent, by role
  double dealer_wall_ms = 0;                              // preprocessing generation + delivery

  uint64_t online_rounds() const;    // max over parties, phases 1..5
  uint64_t offline_rounds() const;   // phase 0 (none under a dealer)
  double online_ms() const;          // max over parties, phases 1..5
  double offline_ms() const;         // dealer + max phase-0 install
  uint64_t online_messages() const;  // all roles, phases 1..5
  uint64_t online_bytes() const;
  uint64_t offline_bytes() const;
};

struct SessionResult {
  UserBills bills;
  SupplierTotals supplier_totals;
  SessionMetrics metrics;
  std::vector<OpenEvent> open_log;  // merged over computing parties
  std::vector<std::string> open_violations;
  std::vector<std::string> routing_violations;
};

// Which opened-value categories a configuration legitimately produces.
std::vector<std::string> audit_open_log(Backend backend, CompareMode mode,
                                        std::span<const OpenEvent> log);

// Validates that every record landed with the user's contracted supplier.
std::vector<std::string> audit_supplier_routing(
    const SupplierTotals& totals, const std::map<UserId, SupplierId>& contracts);

// ---- role programs ----

struct CpOutcome {
  std::map<uint8_t, uint64_t> rounds;
  std::map<uint8_t, double> wall_ms;
  std::vector<OpenEvent> open_log;
};

struct RoleRun {
  std::optional<CpOutcome> cp;
  std::optional<UserBills> user_bills;
  std::optional<SupplierTotals> supplier_totals;
  std::vector<std::string> routing_violations;
  double dealer_wall_ms = 0;
};

// Runs exactly one role to completion over the given endpoint. Dealers read
// private values from the scenario; computing parties use only its public
// setup. Intended both for in-process sessions and separate processes.
RoleRun run_role(Role role, const Scenario& scenario, const SessionConfig& cfg, Endpoint& ep);

// Full in-process session over the in-memory hub.
SessionResult run_session(const Scenario& scenario, const SessionConfig& cfg);

// Full session over caller-provided endpoints (e.g. TCP loopback). The
// shutdown hook is invoked when a role fails, to unblock the others.
SessionResult run_session_over(const Scenario& scenario, const SessionConfig& cfg,
                               const std::function<std::unique_ptr<Endpoint>(Role)>& make_endpoint,
                               const std::function<void()>& shutdown = {});

}  // namespace lembill
