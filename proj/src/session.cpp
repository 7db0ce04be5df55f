#include "lembill/session.hpp"

#include <chrono>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "lembill/rng.hpp"

namespace lembill {

namespace {
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}
}  // namespace

const char* mode_name(CompareMode m) {
  return m == CompareMode::Oblivious ? "oblivious" : "reveal";
}

PublicSetup public_setup(const Scenario& s) {
  return PublicSetup{s.params, s.users, s.prices};
}

PreprocessingBudget session_budget(const PublicSetup& setup, Backend backend, CompareMode mode) {
  PreprocessingBudget b;
  uint64_t user_periods = uint64_t(setup.params.n_users) * setup.params.n_periods;
  if (mode == CompareMode::Oblivious) {
    b.masks = user_periods;
    b.dabits = 2 * user_periods;
    if (backend == Backend::Additive) {
      b.triples = 3 * user_periods;  // m*d plus the two bit-gate products
      b.bit_triples = uint64_t(comparison_and_count()) * user_periods;
    }
  } else if (backend == Backend::Additive) {
    b.triples = user_periods;  // m*d only
  }
  return b;
}

std::vector<UserTupleShares> join_input_tuples(std::span<const SmInputRecord> sm,
                                               std::span<const LemoInputRecord> lemo,
                                               const PublicSetup& setup) {
  std::unordered_map<UserId, const SmInputRecord*> sm_by_id;
  for (const SmInputRecord& r : sm) {
    if (r.zone >= setup.params.n_zones)
      raise(Errc::UnknownZone, "meter tuple for zone " + std::to_string(r.zone));
    if (!sm_by_id.emplace(r.id, &r).second)
      raise(Errc::DuplicateUserId, "meter tuple for user " + std::to_string(r.id));
  }
  std::unordered_map<UserId, const LemoInputRecord*> lemo_by_id;
  for (const LemoInputRecord& r : lemo) {
    if (!lemo_by_id.emplace(r.id, &r).second)
      raise(Errc::DuplicateUserId, "market tuple for user " + std::to_string(r.id));
    if (!sm_by_id.count(r.id))
      raise(Errc::UnknownUserId, "market tuple without meter tuple, user " + std::to_string(r.id));
  }

  std::vector<UserTupleShares> out;
  out.reserve(setup.users.size());
  for (const UserMeta& u : setup.users) {
    auto s = sm_by_id.find(u.id);
    auto l = lemo_by_id.find(u.id);
    if (s == sm_by_id.end() || l == lemo_by_id.end())
      raise(Errc::UnknownUserId, "no joined tuple for user " + std::to_string(u.id));
    out.push_back(UserTupleShares{u.id, s->second->supplier, s->second->zone, l->second->d,
                                  s->second->m, l->second->b});
  }
  if (sm_by_id.size() != setup.users.size() || lemo_by_id.size() != setup.users.size())
    raise(Errc::UnknownUserId, "dealer tuple for a user outside the session");
  return out;
}

std::vector<std::string> audit_open_log(Backend backend, CompareMode mode,
                                        std::span<const OpenEvent> log) {
  std::unordered_set<int> allowed{static_cast<int>(OpenTag::ZoneTuple)};
  if (mode == CompareMode::Oblivious)
    allowed.insert(static_cast<int>(OpenTag::MaskedCompare));
  else
    allowed.insert(static_cast<int>(OpenTag::Deviation));
  if (backend == Backend::Additive) allowed.insert(static_cast<int>(OpenTag::BeaverMask));

  std::vector<std::string> violations;
  for (const OpenEvent& ev : log)
    if (!allowed.count(static_cast<int>(ev.tag)))
      violations.push_back(std::string("unexpected open of ") + open_tag_name(ev.tag) +
                           " in phase " + std::to_string(ev.phase));
  return violations;
}

std::vector<std::string> audit_supplier_routing(const SupplierTotals& totals,
                                                const std::map<UserId, SupplierId>& contracts) {
  std::vector<std::string> violations;
  for (const auto& [sid, entries] : totals) {
    for (const auto& [uid, micro] : entries) {
      auto it = contracts.find(uid);
      if (it == contracts.end())
        violations.push_back("aggregate for unknown user " + std::to_string(uid));
      else if (it->second != sid)
        violations.push_back("user " + std::to_string(uid) + " delivered to supplier " +
                             std::to_string(sid) + ", contracted with " +
                             std::to_string(it->second));
    }
  }
  return violations;
}

// ---- preprocessing store serialization (phase 0) ----

namespace {

void write_arith_share(PayloadWriter& w, const ArithShare& s) {
  w.u64(s.c[0]);
  w.u64(s.c[1]);
}

ArithShare read_arith_share(PayloadReader& r) {
  ArithShare s;
  s.c[0] = r.u64();
  s.c[1] = r.u64();
  return s;
}

std::vector<uint8_t> serialize_store(const PreprocessingStore& st) {
  PayloadWriter w;
  w.u8(static_cast<uint8_t>(st.backend));
  w.u64(st.zero_keys[0]);
  w.u64(st.zero_keys[1]);
  w.u64(st.zero_keys_bin[0]);
  w.u64(st.zero_keys_bin[1]);
  w.u32(static_cast<uint32_t>(st.triples.size()));
  for (const BeaverTriple& t : st.triples) {
    write_arith_share(w, t.a);
    write_arith_share(w, t.b);
    write_arith_share(w, t.c);
  }
  w.u32(static_cast<uint32_t>(st.bit_triples.size()));
  for (const BitTriple& t : st.bit_triples) {
    w.u8(t.a.c[0]);
    w.u8(t.a.c[1]);
    w.u8(t.b.c[0]);
    w.u8(t.b.c[1]);
    w.u8(t.c.c[0]);
    w.u8(t.c.c[1]);
  }
  w.u32(static_cast<uint32_t>(st.masks.size()));
  for (const ComparisonMask& m : st.masks) {
    write_arith_share(w, m.r);
    for (const BitShare& b : m.r_bits) {
      w.u8(b.c[0]);
      w.u8(b.c[1]);
    }
  }
  w.u32(static_cast<uint32_t>(st.dabits.size()));
  for (const DaBit& d : st.dabits) {
    w.u8(d.binary.c[0]);
    w.u8(d.binary.c[1]);
    write_arith_share(w, d.arith);
  }
  return w.take();
}

PreprocessingStore parse_store(std::span<const uint8_t> payload) {
  PayloadReader r(payload);
  PreprocessingStore st;
  st.backend = static_cast<Backend>(r.u8());
  st.zero_keys = {r.u64(), r.u64()};
  st.zero_keys_bin = {r.u64(), r.u64()};
  uint32_t n = r.u32();
  st.triples.resize(n);
  for (auto& t : st.triples) {
    t.a = read_arith_share(r);
    t.b = read_arith_share(r);
    t.c = read_arith_share(r);
  }
  n = r.u32();
  st.bit_triples.resize(n);
  for (auto& t : st.bit_triples) {
    t.a.c = {r.u8(), r.u8()};
    t.b.c = {r.u8(), r.u8()};
    t.c.c = {r.u8(), r.u8()};
  }
  n = r.u32();
  st.masks.resize(n);
  for (auto& m : st.masks) {
    m.r = read_arith_share(r);
    for (auto& b : m.r_bits) b.c = {r.u8(), r.u8()};
  }
  n = r.u32();
  st.dabits.resize(n);
  for (auto& d : st.dabits) {
    d.binary.c = {r.u8(), r.u8()};
    d.arith = read_arith_share(r);
  }
  return st;
}

// ---- dealer programs ----

double run_preproc_dealer(const Scenario& scenario, const SessionConfig& cfg, Endpoint& ep) {
  auto t0 = Clock::now();
  PublicSetup setup = public_setup(scenario);
  PreprocessingBudget budget = session_budget(setup, cfg.backend, cfg.mode);
  auto stores = deal_preprocessing(cfg.backend, budget, splitmix64(cfg.seed) ^ 0x0ff1ceULL);
  for (int i = 0; i < 3; ++i) ep.send(computing_party(i), /*phase=*/0, serialize_store(stores[i]));
  return ms_since(t0);
}

void run_sm_dealer(const Scenario& scenario, const SessionConfig& cfg, Endpoint& ep) {
  std::mt19937_64 rng = seeded_engine(cfg.seed, /*tag=*/0x736d0001ULL);
  for (uint32_t k = 0; k < scenario.params.n_periods; ++k) {
    std::array<PayloadWriter, 3> w;
    for (auto& wr : w) {
      wr.u32(k);
      wr.u32(scenario.params.n_users);
    }
    for (uint32_t i = 0; i < scenario.params.n_users; ++i) {
      const UserMeta& u = scenario.users[i];
      auto m = share_arith(cfg.backend, RingValue::from_signed(scenario.periods[k][i].m_w).raw, rng);
      for (int p = 0; p < 3; ++p) {
        w[p].u32(u.id);
        w[p].u32(u.supplier);
        w[p].u32(u.zone);
        write_arith_share(w[p], m[p]);
      }
    }
    for (int p = 0; p < 3; ++p) ep.send(computing_party(p), /*phase=*/1, w[p].take());
  }
}

void run_lemo_dealer(const Scenario& scenario, const SessionConfig& cfg, Endpoint& ep) {
  std::mt19937_64 rng = seeded_engine(cfg.seed, /*tag=*/0x6c656d6fULL);
  for (uint32_t k = 0; k < scenario.params.n_periods; ++k) {
    std::array<PayloadWriter, 3> w;
    for (auto& wr : w) {
      wr.u32(k);
      wr.u32(scenario.params.n_users);
    }
    for (uint32_t i = 0; i < scenario.params.n_users; ++i) {
      const PeriodRecord& rec = scenario.periods[k][i];
      auto d = share_arith(cfg.backend, rec.d, rng);
      auto b = share_arith(cfg.backend, RingValue::from_signed(rec.b_w).raw, rng);
      for (int p = 0; p < 3; ++p) {
        w[p].u32(scenario.users[i].id);
        write_arith_share(w[p], d[p]);
        write_arith_share(w[p], b[p]);
      }
    }
    for (int p = 0; p < 3; ++p) ep.send(computing_party(p), /*phase=*/1, w[p].take());
  }
}

// ---- computing party ----

struct ZoneShareState {
  ArithShare t, p, c;
};

CpOutcome run_computing_party(int idx, const PublicSetup& setup, const SessionConfig& cfg,
                              Endpoint& ep) {
  CpOutcome out;
  uint32_t n_users = setup.params.n_users;
  uint32_t n_zones = setup.params.n_zones;

  auto t_phase = Clock::now();
  WireMessage preproc = ep.recv(Role::PreprocDealer);
  PartyEngine eng(idx, cfg.backend, ep, parse_store(preproc.payload));
  out.wall_ms[0] += ms_since(t_phase);

  std::vector<uint32_t> zone_user_count(n_zones, 0);
  for (const UserMeta& u : setup.users) zone_user_count.at(u.zone) += 1;

  std::vector<ArithShare> supplier_running(n_users);  // per-user bill total

  for (uint32_t k = 0; k < setup.params.n_periods; ++k) {
    const PriceSchedule& prices = setup.prices.at(k);

    // Phase 1: receive and join the dealers' tuple streams.
    t_phase = Clock::now();
    eng.set_phase(1);
    WireMessage sm_msg = ep.recv(Role::SmartMeterDealer);
    WireMessage lemo_msg = ep.recv(Role::LemoDealer);

    std::vector<SmInputRecord> sm_records;
    {
      PayloadReader r(sm_msg.payload);
      if (r.u32() != k) raise(Errc::WireFormat, "meter batch period mismatch");
      uint32_t n = r.u32();
      sm_records.reserve(n);
      for (uint32_t i = 0; i < n; ++i) {
        SmInputRecord rec;
        rec.id = r.u32();
        rec.supplier = r.u32();
        rec.zone = r.u32();
        rec.m = read_arith_share(r);
        sm_records.push_back(rec);
      }
    }
    std::vector<LemoInputRecord> lemo_records;
    {
      PayloadReader r(lemo_msg.payload);
      if (r.u32() != k) raise(Errc::WireFormat, "market batch period mismatch");
      uint32_t n = r.u32();
      lemo_records.reserve(n);
      for (uint32_t i = 0; i < n; ++i) {
        LemoInputRecord rec;
        rec.id = r.u32();
        rec.d = read_arith_share(r);
        rec.b = read_arith_share(r);
        lemo_records.push_back(rec);
      }
    }
    std::vector<UserTupleShares> tuples = join_input_tuples(sm_records, lemo_records, setup);
    out.wall_ms[1] += ms_since(t_phase);

    // Phase 2: zone aggregation, additions only, no communication.
    t_phase = Clock::now();
    eng.set_phase(2);
    std::vector<ZoneShareState> zones(n_zones);
    std::vector<ArithShare> deviations(n_users);
    ArithShare one = eng.public_share(1);
    for (uint32_t i = 0; i < n_users; ++i) {
      const UserTupleShares& u = tuples[i];
      deviations[i] = eng.sub(u.m, u.b);
      ZoneShareState& z = zones.at(u.zone);
      z.t = eng.add(z.t, deviations[i]);
      z.p = eng.add(z.p, u.d);
      z.c = eng.add(z.c, eng.sub(one, u.d));
    }
    out.wall_ms[2] += ms_since(t_phase);

    // Phase 3: open zone tuples, then weight and coefficients in clear.
    t_phase = Clock::now();
    eng.set_phase(3);
    if (cfg.fault.corrupt_phase3_share && idx == cfg.fault.party &&
        cfg.fault.zone_index < n_zones)
      zones[cfg.fault.zone_index].t.c[0] += cfg.fault.delta;

    std::vector<ArithShare> to_open;
    to_open.reserve(3 * n_zones);
    for (const auto& z : zones) to_open.push_back(z.t);
    for (const auto& z : zones) to_open.push_back(z.p);
    for (const auto& z : zones) to_open.push_back(z.c);
    std::vector<uint64_t> opened = eng.open_checked(to_open, OpenTag::ZoneTuple);

    std::vector<ZoneAggregate> aggregates(n_zones);
    for (uint32_t z = 0; z < n_zones; ++z) {
      aggregates[z].zone_id = z;
      aggregates[z].t = RingValue{opened[z]};
      aggregates[z].p = opened[n_zones + z];
      aggregates[z].c = opened[2 * n_zones + z];
    }
    GlobalDeviation global = compute_weight(aggregates);

    std::vector<uint64_t> coeff_over(n_zones, 0), coeff_under(n_zones, 0);
    std::vector<uint64_t> price_base(n_zones), price_fee(n_zones);
    for (uint32_t z = 0; z < n_zones; ++z) {
      ZoneBranchCoefficients cf = zone_coefficients(aggregates[z], global, prices);
      coeff_over[z] = cf.over.scaled.raw;
      coeff_under[z] = cf.under.scaled.raw;
      const ZoneFees& fees = prices.fees_for(z);
      price_base[z] = RingValue::from_signed(prices.tp.micro() + fees.nf_c.micro()).raw;
      price_fee[z] = RingValue::from_signed(-(fees.nf_p.micro() + fees.nf_c.micro())).raw;
    }
    out.wall_ms[3] += ms_since(t_phase);

    // Phase 4: individual billing on shares, user by user. In oblivious
    // mode every user gets the identical subcircuit; which coefficient (if
    // any) is live is decided by the public zone state alone.
    t_phase = Clock::now();
    eng.set_phase(4);
    std::vector<ArithShare> bills(n_users);
    for (uint32_t i = 0; i < n_users; ++i) {
      const UserTupleShares& u = tuples[i];
      std::array<ArithShare, 1> ml{u.m}, dl{u.d};
      ArithShare md = eng.mul(ml, dl)[0];
      ArithShare bill =
          eng.add(eng.mul_public(u.m, price_base[u.zone]), eng.mul_public(md, price_fee[u.zone]));

      if (cfg.mode == CompareMode::Oblivious) {
        std::array<ArithShare, 1> vv{deviations[i]};
        SignBits sign = eng.compare_sign(vv);
        std::array<BitShare, 2> bits{sign.gt[0], sign.lt[0]};
        std::vector<ArithShare> conv = eng.bit_to_arith(bits);
        std::array<ArithShare, 2> lhs{conv[0], conv[1]}, rhs{u.d, u.d};
        std::vector<ArithShare> prod = eng.mul(lhs, rhs);
        ArithShare adj = eng.add(eng.mul_public(prod[0], coeff_over[u.zone]),
                                 eng.mul_public(eng.sub(conv[1], prod[1]), coeff_under[u.zone]));
        bill = eng.add(bill, adj);
      } else {
        std::array<ArithShare, 1> vv{deviations[i]};
        int64_t v = static_cast<int64_t>(eng.open(vv, OpenTag::Deviation)[0]);
        uint64_t live_over = v > 0 ? coeff_over[u.zone] : 0;
        uint64_t live_under = v < 0 ? coeff_under[u.zone] : 0;
        ArithShare adj = eng.add_public(eng.mul_public(u.d, live_over - live_under), live_under);
        bill = eng.add(bill, adj);
      }
      bills[i] = bill;
      supplier_running[i] = eng.add(supplier_running[i], bill);
    }
    out.wall_ms[4] += ms_since(t_phase);

    // Phase 5 (per period): bills to the user output party.
    t_phase = Clock::now();
    eng.set_phase(5);
    PayloadWriter w;
    w.u32(k);
    w.u32(n_users);
    for (uint32_t i = 0; i < n_users; ++i) {
      w.u32(setup.users[i].id);
      write_arith_share(w, bills[i]);
    }
    ep.send(Role::UserOutput, 5, w.take());
    out.wall_ms[5] += ms_since(t_phase);
  }

  // Phase 5 (once): per-customer aggregates to the supplier output party.
  t_phase = Clock::now();
  eng.set_phase(5);
  std::map<SupplierId, std::vector<uint32_t>> by_supplier;
  for (uint32_t i = 0; i < n_users; ++i) by_supplier[setup.users[i].supplier].push_back(i);
  PayloadWriter w;
  w.u32(n_users);
  for (const auto& [sid, members] : by_supplier) {
    for (uint32_t i : members) {
      w.u32(sid);
      w.u32(setup.users[i].id);
      write_arith_share(w, supplier_running[i]);
    }
  }
  ep.send(Role::SupplierOutput, 5, w.take());
  out.wall_ms[5] += ms_since(t_phase);

  out.rounds = eng.rounds_by_phase();
  out.open_log = eng.open_log();
  return out;
}

// ---- output parties ----

UserBills run_user_output(const PublicSetup& setup, const SessionConfig& cfg, Endpoint& ep) {
  uint32_t n_users = setup.params.n_users;
  std::unordered_map<UserId, uint32_t> index_of;
  for (uint32_t i = 0; i < n_users; ++i) index_of[setup.users[i].id] = i;

  UserBills bills(setup.params.n_periods, std::vector<int64_t>(n_users, 0));
  for (uint32_t k = 0; k < setup.params.n_periods; ++k) {
    std::vector<std::array<ArithShare, 3>> shares(n_users);
    for (int p = 0; p < 3; ++p) {
      WireMessage m = ep.recv(computing_party(p));
      PayloadReader r(m.payload);
      if (r.u32() != k) raise(Errc::WireFormat, "bill batch period mismatch");
      uint32_t n = r.u32();
      if (n != n_users) raise(Errc::WireFormat, "bill batch size mismatch");
      for (uint32_t i = 0; i < n; ++i) {
        UserId uid = r.u32();
        auto it = index_of.find(uid);
        if (it == index_of.end()) raise(Errc::UnknownUserId, "bill for user " + std::to_string(uid));
        shares[it->second][p] = read_arith_share(r);
      }
    }
    for (uint32_t i = 0; i < n_users; ++i) {
      if (!shares_consistent(cfg.backend, shares[i]))
        raise(Errc::OpenDisagreement, "inconsistent bill shares for user " +
                                          std::to_string(setup.users[i].id));
      bills[k][i] = static_cast<int64_t>(reconstruct_arith(cfg.backend, shares[i]));
    }
  }
  return bills;
}

struct SupplierOutputRun {
  SupplierTotals totals;
  std::vector<std::string> violations;
};

SupplierOutputRun run_supplier_output(const PublicSetup& setup, const SessionConfig& cfg,
                                      Endpoint& ep) {
  std::map<UserId, SupplierId> contracts;
  for (const UserMeta& u : setup.users) contracts[u.id] = u.supplier;

  std::map<std::pair<SupplierId, UserId>, std::array<ArithShare, 3>> shares;
  for (int p = 0; p < 3; ++p) {
    WireMessage m = ep.recv(computing_party(p));
    PayloadReader r(m.payload);
    uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
      SupplierId sid = r.u32();
      UserId uid = r.u32();
      shares[{sid, uid}][p] = read_arith_share(r);
    }
  }

  SupplierOutputRun out;
  for (const auto& [key, sh] : shares) {
    auto [sid, uid] = key;
    auto it = contracts.find(uid);
    if (it == contracts.end() || it->second != sid) {
      out.violations.push_back("aggregate for user " + std::to_string(uid) +
                               " addressed to supplier " + std::to_string(sid));
      continue;
    }
    out.totals[sid].emplace_back(uid, static_cast<int64_t>(reconstruct_arith(cfg.backend, sh)));
  }
  if (!out.violations.empty())
    raise(Errc::UnauthorizedRecipient, out.violations.front());
  return out;
}

}  // namespace

RoleRun run_role(Role role, const Scenario& scenario, const SessionConfig& cfg, Endpoint& ep) {
  RoleRun run;
  PublicSetup setup = public_setup(scenario);
  switch (role) {
    case Role::PreprocDealer:
      run.dealer_wall_ms = run_preproc_dealer(scenario, cfg, ep);
      break;
    case Role::SmartMeterDealer:
      run_sm_dealer(scenario, cfg, ep);
      break;
    case Role::LemoDealer:
      run_lemo_dealer(scenario, cfg, ep);
      break;
    case Role::ComputingParty1:
    case Role::ComputingParty2:
    case Role::ComputingParty3:
      run.cp = run_computing_party(computing_party_index(role), setup, cfg, ep);
      break;
    case Role::UserOutput:
      run.user_bills = run_user_output(setup, cfg, ep);
      break;
    case Role::SupplierOutput: {
      SupplierOutputRun s = run_supplier_output(setup, cfg, ep);
      run.supplier_totals = std::move(s.totals);
      run.routing_violations = std::move(s.violations);
      break;
    }
  }
  return run;
}

// ---- metrics assembly ----

uint64_t SessionMetrics::online_rounds() const {
  uint64_t best = 0;
  for (const auto& pm : cp_rounds) {
    uint64_t sum = 0;
    for (const auto& [phase, r] : pm)
      if (phase >= 1) sum += r;
    best = std::max(best, sum);
  }
  return best;
}

uint64_t SessionMetrics::offline_rounds() const { return 0; }

double SessionMetrics::online_ms() const {
  double best = 0;
  for (const auto& pm : cp_wall_ms) {
    double sum = 0;
    for (const auto& [phase, msv] : pm)
      if (phase >= 1) sum += msv;
    best = std::max(best, sum);
  }
  return best;
}

double SessionMetrics::offline_ms() const {
  double cp0 = 0;
  for (const auto& pm : cp_wall_ms) {
    auto it = pm.find(0);
    if (it != pm.end()) cp0 = std::max(cp0, it->second);
  }
  return dealer_wall_ms + cp0;
}

uint64_t SessionMetrics::online_messages() const {
  uint64_t n = 0;
  for (const auto& [role, t] : traffic)
    for (const auto& [phase, pt] : t.sent)
      if (phase >= 1) n += pt.messages;
  return n;
}

uint64_t SessionMetrics::online_bytes() const {
  uint64_t n = 0;
  for (const auto& [role, t] : traffic)
    for (const auto& [phase, pt] : t.sent)
      if (phase >= 1) n += pt.bytes;
  return n;
}

uint64_t SessionMetrics::offline_bytes() const {
  uint64_t n = 0;
  for (const auto& [role, t] : traffic) {
    auto it = t.sent.find(0);
    if (it != t.sent.end()) n += it->second.bytes;
  }
  return n;
}

// ---- full-session drivers ----

SessionResult run_session_over(const Scenario& scenario, const SessionConfig& cfg,
                               const std::function<std::unique_ptr<Endpoint>(Role)>& make_endpoint,
                               const std::function<void()>& shutdown) {
  struct Slot {
    RoleRun run;
    RoleTraffic traffic;
    std::exception_ptr error;
  };
  std::array<Slot, kRoleCount> slots;
  std::vector<std::thread> threads;
  threads.reserve(kRoleCount);

  for (int r = 0; r < kRoleCount; ++r) {
    threads.emplace_back([&, r] {
      Role role = static_cast<Role>(r);
      try {
        std::unique_ptr<Endpoint> ep = make_endpoint(role);
        slots[r].run = run_role(role, scenario, cfg, *ep);
        slots[r].traffic = {ep->sent_by_phase(), ep->shape()};
      } catch (...) {
        slots[r].error = std::current_exception();
        if (shutdown) shutdown();
      }
    });
  }
  for (auto& t : threads) t.join();

  // Surface the root cause, not the TransportClosed/Timeout fallout that a
  // failing peer induces at the other roles.
  std::exception_ptr fallout;
  for (const Slot& s : slots) {
    if (!s.error) continue;
    try {
      std::rethrow_exception(s.error);
    } catch (const ProtocolError& e) {
      if (e.code() != Errc::TransportClosed && e.code() != Errc::Timeout)
        std::rethrow_exception(s.error);
      if (!fallout) fallout = s.error;
    } catch (...) {
      std::rethrow_exception(s.error);
    }
  }
  if (fallout) std::rethrow_exception(fallout);

  SessionResult result;
  result.bills = *slots[static_cast<int>(Role::UserOutput)].run.user_bills;
  result.supplier_totals = *slots[static_cast<int>(Role::SupplierOutput)].run.supplier_totals;
  result.routing_violations = slots[static_cast<int>(Role::SupplierOutput)].run.routing_violations;
  result.metrics.dealer_wall_ms = slots[static_cast<int>(Role::PreprocDealer)].run.dealer_wall_ms;
  for (int i = 0; i < 3; ++i) {
    const Slot& s = slots[static_cast<int>(computing_party(i))];
    result.metrics.cp_rounds[i] = s.run.cp->rounds;
    result.metrics.cp_wall_ms[i] = s.run.cp->wall_ms;
    result.open_log.insert(result.open_log.end(), s.run.cp->open_log.begin(),
                           s.run.cp->open_log.end());
  }
  for (int r = 0; r < kRoleCount; ++r)
    result.metrics.traffic[static_cast<Role>(r)] = std::move(slots[r].traffic);
  result.open_violations = audit_open_log(cfg.backend, cfg.mode, result.open_log);

  std::map<UserId, SupplierId> contracts = scenario.contracts();
  auto routing = audit_supplier_routing(result.supplier_totals, contracts);
  result.routing_violations.insert(result.routing_violations.end(), routing.begin(), routing.end());
  return result;
}

SessionResult run_session(const Scenario& scenario, const SessionConfig& cfg) {
  InMemoryHub hub(cfg.timeout_ms);
  return run_session_over(
      scenario, cfg, [&](Role r) { return hub.endpoint(r); }, [&] { hub.shutdown(); });
}

}  // namespace lembill
