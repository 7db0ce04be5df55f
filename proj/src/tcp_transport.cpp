#include "lembill/tcp_transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cctype>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

#include "json.hpp"

namespace lembill {

EndpointMap local_endpoints(uint16_t base_port) {
  EndpointMap eps;
  for (int r = 0; r < kRoleCount; ++r)
    eps[static_cast<Role>(r)] = {"127.0.0.1", static_cast<uint16_t>(base_port + r)};
  return eps;
}

namespace {

EndpointAddress parse_host_port(const std::string& s, const std::string& what) {
  auto colon = s.rfind(':');
  if (colon == std::string::npos) raise(Errc::InvalidParams, what + " must be host:port");
  return {s.substr(0, colon), static_cast<uint16_t>(std::stoi(s.substr(colon + 1)))};
}

}  // namespace

void apply_endpoint_file(EndpointMap& eps, const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (int r = 0; r < kRoleCount; ++r) {
      Role role = static_cast<Role>(r);
      if (key == role_name(role)) {
        eps[role] = parse_host_port(value.get<std::string>(), key);
        known = true;
        break;
      }
    }
    if (!known) raise(Errc::InvalidParams, "unknown role in endpoint file: " + key);
  }
}

void apply_endpoint_env_overrides(EndpointMap& eps) {
  for (int r = 0; r < kRoleCount; ++r) {
    Role role = static_cast<Role>(r);
    std::string var = "LEMBILL_EP_";
    for (const char* p = role_name(role); *p; ++p) var += static_cast<char>(std::toupper(*p));
    const char* val = std::getenv(var.c_str());
    if (!val) continue;
    eps[role] = parse_host_port(val, var);
  }
}

namespace {

void write_all(int fd, const uint8_t* data, size_t n) {
  while (n > 0) {
    ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w <= 0) raise(Errc::TransportClosed, "tcp send failed");
    data += w;
    n -= static_cast<size_t>(w);
  }
}

bool read_all(int fd, uint8_t* data, size_t n) {
  while (n > 0) {
    ssize_t r = ::recv(fd, data, n, 0);
    if (r <= 0) return false;
    data += r;
    n -= static_cast<size_t>(r);
  }
  return true;
}

class TcpEndpoint : public Endpoint {
 public:
  TcpEndpoint(Role self, EndpointMap eps, int timeout_ms)
      : self_(self), eps_(std::move(eps)), timeout_ms_(timeout_ms) {
    start_listener();
  }

  ~TcpEndpoint() override {
    closing_.store(true);
    if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR), ::close(listen_fd_);
    {
      std::lock_guard<std::mutex> g(conn_mutex_);
      for (int fd : accepted_fds_) ::shutdown(fd, SHUT_RDWR), ::close(fd);
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    for (auto& t : reader_threads_)
      if (t.joinable()) t.join();
    for (auto& [role, fd] : out_fds_)
      if (fd >= 0) ::close(fd);
    for (auto& lk : inboxes_) lk.cv.notify_all();
  }

  void send(Role to, uint8_t phase, std::span<const uint8_t> payload) override {
    WireMessage m;
    m.phase = phase;
    m.sender = self_;
    m.round = next_out_round_[static_cast<int>(to)]++;
    m.payload.assign(payload.begin(), payload.end());
    std::vector<uint8_t> frame = encode_frame(m);
    write_all(connection_to(to), frame.data(), frame.size());
    note_send(to, phase, frame.size());
  }

  WireMessage recv(Role from) override {
    Inbox& lk = inboxes_[static_cast<int>(from)];
    std::unique_lock<std::mutex> g(lk.m);
    bool ok = lk.cv.wait_for(g, std::chrono::milliseconds(timeout_ms_),
                             [&] { return !lk.q.empty() || closing_.load(); });
    if (!ok) raise(Errc::Timeout, std::string("tcp recv from ") + role_name(from));
    if (lk.q.empty()) raise(Errc::TransportClosed, "endpoint closing");
    WireMessage m = std::move(lk.q.front());
    lk.q.pop();
    if (lk.any && m.round <= lk.last_round) raise(Errc::WireFormat, "link round index not increasing");
    lk.last_round = m.round;
    lk.any = true;
    return m;
  }

  Role self() const override { return self_; }

 private:
  struct Inbox {
    std::mutex m;
    std::condition_variable cv;
    std::queue<WireMessage> q;
    uint32_t last_round = 0;
    bool any = false;
  };

  void start_listener() {
    const EndpointAddress& addr = eps_.at(self_);
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) raise(Errc::TransportClosed, "socket()");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(addr.port);
    if (::inet_pton(AF_INET, addr.host.c_str(), &sa.sin_addr) != 1)
      raise(Errc::InvalidParams, "bad listen host " + addr.host);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0)
      raise(Errc::TransportClosed, "bind " + addr.host + ":" + std::to_string(addr.port));
    if (::listen(listen_fd_, kRoleCount) != 0) raise(Errc::TransportClosed, "listen()");

    accept_thread_ = std::thread([this] {
      while (!closing_.load()) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) break;
        int one2 = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one2, sizeof one2);
        std::lock_guard<std::mutex> g(conn_mutex_);
        accepted_fds_.push_back(fd);
        reader_threads_.emplace_back([this, fd] { reader_loop(fd); });
      }
    });
  }

  void reader_loop(int fd) {
    for (;;) {
      uint8_t lenbuf[4];
      if (!read_all(fd, lenbuf, 4)) return;
      uint32_t len = 0;
      for (int i = 0; i < 4; ++i) len |= static_cast<uint32_t>(lenbuf[i]) << (8 * i);
      std::vector<uint8_t> frame(4 + len);
      std::memcpy(frame.data(), lenbuf, 4);
      if (!read_all(fd, frame.data() + 4, len)) return;
      WireMessage m = decode_frame(frame);
      Inbox& lk = inboxes_[static_cast<int>(m.sender)];
      {
        std::lock_guard<std::mutex> g(lk.m);
        lk.q.push(std::move(m));
      }
      lk.cv.notify_all();
    }
  }

  int connection_to(Role to) {
    std::lock_guard<std::mutex> g(conn_mutex_);
    int idx = static_cast<int>(to);
    auto it = out_fds_.find(idx);
    if (it != out_fds_.end()) return it->second;

    const EndpointAddress& addr = eps_.at(to);
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(addr.port);
    if (::inet_pton(AF_INET, addr.host.c_str(), &sa.sin_addr) != 1)
      raise(Errc::InvalidParams, "bad host " + addr.host);

    // The peer may not be up yet; retry within the timeout budget.
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms_);
    for (;;) {
      int fd = ::socket(AF_INET, SOCK_STREAM, 0);
      if (fd < 0) raise(Errc::TransportClosed, "socket()");
      if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) == 0) {
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        out_fds_[idx] = fd;
        return fd;
      }
      ::close(fd);
      if (std::chrono::steady_clock::now() >= deadline)
        raise(Errc::Timeout, std::string("connect to ") + role_name(to));
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }

  Role self_;
  EndpointMap eps_;
  int timeout_ms_;
  int listen_fd_ = -1;
  std::atomic<bool> closing_{false};
  std::thread accept_thread_;
  std::mutex conn_mutex_;
  std::vector<int> accepted_fds_;
  std::vector<std::thread> reader_threads_;
  std::map<int, int> out_fds_;
  uint32_t next_out_round_[kRoleCount] = {};
  Inbox inboxes_[kRoleCount];
};

}  // namespace

std::unique_ptr<Endpoint> make_tcp_endpoint(Role self, const EndpointMap& eps, int timeout_ms) {
  return std::make_unique<TcpEndpoint>(self, eps, timeout_ms);
}

}  // namespace lembill
