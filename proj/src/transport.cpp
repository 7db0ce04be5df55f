#include "lembill/transport.hpp"

#include <chrono>

namespace lembill {

const char* role_name(Role r) {
  switch (r) {
    case Role::PreprocDealer: return "preproc";
    case Role::SmartMeterDealer: return "sm";
    case Role::LemoDealer: return "lemo";
    case Role::ComputingParty1: return "cp1";
    case Role::ComputingParty2: return "cp2";
    case Role::ComputingParty3: return "cp3";
    case Role::UserOutput: return "users";
    case Role::SupplierOutput: return "suppliers";
  }
  return "?";
}

Role computing_party(int index) {
  return static_cast<Role>(static_cast<int>(Role::ComputingParty1) + index);
}

int computing_party_index(Role r) {
  int i = static_cast<int>(r) - static_cast<int>(Role::ComputingParty1);
  return (i >= 0 && i < 3) ? i : -1;
}

std::vector<uint8_t> encode_frame(const WireMessage& m) {
  // length counts everything after the length field: phase, sender, round, payload.
  uint32_t len = static_cast<uint32_t>(6 + m.payload.size());
  std::vector<uint8_t> out;
  out.reserve(4 + len);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(len >> (8 * i)));
  out.push_back(m.phase);
  out.push_back(static_cast<uint8_t>(m.sender));
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(m.round >> (8 * i)));
  out.insert(out.end(), m.payload.begin(), m.payload.end());
  return out;
}

WireMessage decode_frame(std::span<const uint8_t> frame) {
  if (frame.size() < 10) raise(Errc::WireFormat, "frame shorter than header");
  uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<uint32_t>(frame[i]) << (8 * i);
  if (len != frame.size() - 4) raise(Errc::WireFormat, "length field does not match frame");
  WireMessage m;
  m.phase = frame[4];
  if (frame[5] >= kRoleCount) raise(Errc::WireFormat, "unknown sender role");
  m.sender = static_cast<Role>(frame[5]);
  m.round = 0;
  for (int i = 0; i < 4; ++i) m.round |= static_cast<uint32_t>(frame[6 + i]) << (8 * i);
  m.payload.assign(frame.begin() + 10, frame.end());
  return m;
}

namespace {

class InMemoryEndpoint : public Endpoint {
 public:
  InMemoryEndpoint(InMemoryHub* hub, Role self) : hub_(hub), self_(self) {}

  void send(Role to, uint8_t phase, std::span<const uint8_t> payload) override {
    auto& lk = hub_->link(self_, to);
    WireMessage m;
    m.phase = phase;
    m.sender = self_;
    m.payload.assign(payload.begin(), payload.end());
    size_t frame_bytes = 4 + 6 + payload.size();
    {
      std::lock_guard<std::mutex> g(lk.m);
      if (hub_->closed_) raise(Errc::TransportClosed, "hub shut down");
      m.round = lk.next_send_round++;
      lk.q.push(std::move(m));
    }
    lk.cv.notify_all();
    note_send(to, phase, frame_bytes);
  }

  WireMessage recv(Role from) override {
    auto& lk = hub_->link(from, self_);
    std::unique_lock<std::mutex> g(lk.m);
    bool ok = lk.cv.wait_for(g, std::chrono::milliseconds(hub_->timeout_ms_),
                             [&] { return !lk.q.empty() || hub_->closed_; });
    if (!ok) raise(Errc::Timeout, std::string("recv from ") + role_name(from));
    if (lk.q.empty()) raise(Errc::TransportClosed, "hub shut down");
    WireMessage m = std::move(lk.q.front());
    lk.q.pop();
    if (lk.any_received && m.round <= lk.last_recv_round)
      raise(Errc::WireFormat, "link round index not increasing");
    lk.last_recv_round = m.round;
    lk.any_received = true;
    return m;
  }

  Role self() const override { return self_; }

 private:
  InMemoryHub* hub_;
  Role self_;
};

}  // namespace

std::unique_ptr<Endpoint> InMemoryHub::endpoint(Role r) {
  return std::make_unique<InMemoryEndpoint>(this, r);
}

void InMemoryHub::shutdown() {
  closed_.store(true);
  for (int f = 0; f < kRoleCount; ++f) {
    for (int t = 0; t < kRoleCount; ++t) {
      // Take the lock so waiters re-check the predicate after the store.
      std::lock_guard<std::mutex> g(links_[f][t].m);
    }
  }
  for (int f = 0; f < kRoleCount; ++f)
    for (int t = 0; t < kRoleCount; ++t) links_[f][t].cv.notify_all();
}

}  // namespace lembill
