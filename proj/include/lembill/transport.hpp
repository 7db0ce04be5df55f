#pragma once

// Message transport between protocol roles.
//
// Wire format (little-endian):
//   u32 length   bytes that follow this field
//   u8  phase    0 = offline/preprocessing, 1..5 = protocol phases
//   u8  sender   Role of the sending endpoint
//   u32 round    per (sender, receiver) link, strictly increasing
//   payload      ring elements as 8-byte LE words; share batches are
//                contiguous arrays prefixed by a u32 count
//
// Two implementations share the interface: an in-process hub of queues for
// fast tests and benchmarks, and a TCP transport for running the roles as
// separate processes.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "lembill/errors.hpp"

namespace lembill {

enum class Role : uint8_t {
  PreprocDealer = 0,
  SmartMeterDealer = 1,
  LemoDealer = 2,
  ComputingParty1 = 3,
  ComputingParty2 = 4,
  ComputingParty3 = 5,
  UserOutput = 6,
  SupplierOutput = 7,
};

inline constexpr int kRoleCount = 8;

const char* role_name(Role r);
Role computing_party(int index);          // index in [0, 3)
int computing_party_index(Role r);        // -1 for non-CP roles

struct WireMessage {
  uint8_t phase = 0;
  Role sender = Role::PreprocDealer;
  uint32_t round = 0;
  std::vector<uint8_t> payload;
};

std::vector<uint8_t> encode_frame(const WireMessage& m);
// Decodes one frame; throws WireFormat on length mismatch.
WireMessage decode_frame(std::span<const uint8_t> frame);

// Per-endpoint traffic counters, kept per phase.
struct PhaseTraffic {
  uint64_t messages = 0;
  uint64_t bytes = 0;
};

struct ShapeEntry {  // one sent message, for transcript-shape audits
  uint8_t phase;
  Role to;
  uint32_t bytes;
};

class Endpoint {
 public:
  virtual ~Endpoint() = default;

  // Blocking; frames the payload with the current phase tag and link round.
  virtual void send(Role to, uint8_t phase, std::span<const uint8_t> payload) = 0;
  // Blocking receive of the next message from `from` (per-link FIFO order).
  virtual WireMessage recv(Role from) = 0;

  virtual Role self() const = 0;

  const std::map<uint8_t, PhaseTraffic>& sent_by_phase() const { return sent_by_phase_; }
  const std::vector<ShapeEntry>& shape() const { return shape_; }

 protected:
  void note_send(Role to, uint8_t phase, size_t frame_bytes) {
    auto& t = sent_by_phase_[phase];
    t.messages += 1;
    t.bytes += frame_bytes;
    shape_.push_back({phase, to, static_cast<uint32_t>(frame_bytes)});
  }

  std::map<uint8_t, PhaseTraffic> sent_by_phase_;
  std::vector<ShapeEntry> shape_;
};

// ---- in-process hub ----

class InMemoryHub {
 public:
  explicit InMemoryHub(int timeout_ms = 120000) : timeout_ms_(timeout_ms) {}

  std::unique_ptr<Endpoint> endpoint(Role r);

  // Wakes every blocked receiver with TransportClosed; used when one role
  // fails so the others do not hang.
  void shutdown();

  // Implementation details, public for the endpoint defined in the .cpp.
  struct Link {
    std::mutex m;
    std::condition_variable cv;
    std::queue<WireMessage> q;
    uint32_t next_send_round = 0;
    uint32_t last_recv_round = 0;
    bool any_received = false;
  };

  Link& link(Role from, Role to) { return links_[static_cast<int>(from)][static_cast<int>(to)]; }

  Link links_[kRoleCount][kRoleCount];
  std::atomic<bool> closed_{false};
  int timeout_ms_;
};

// Payload writer/reader helpers for the formats above.
class PayloadWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u64_array(std::span<const uint64_t> vs) {
    u32(static_cast<uint32_t>(vs.size()));
    for (uint64_t v : vs) u64(v);
  }
  void u8_array(std::span<const uint8_t> vs) {
    u32(static_cast<uint32_t>(vs.size()));
    buf_.insert(buf_.end(), vs.begin(), vs.end());
  }
  std::vector<uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<uint8_t> buf_;
};

class PayloadReader {
 public:
  explicit PayloadReader(std::span<const uint8_t> data) : data_(data) {}

  uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  std::vector<uint64_t> u64_array() {
    uint32_t n = u32();
    std::vector<uint64_t> out(n);
    for (auto& v : out) v = u64();
    return out;
  }
  std::vector<uint8_t> u8_array() {
    uint32_t n = u32();
    need(n);
    std::vector<uint8_t> out(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(size_t n) {
    if (pos_ + n > data_.size()) raise(Errc::WireFormat, "payload truncated");
  }
  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

}  // namespace lembill
