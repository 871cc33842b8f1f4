#pragma once

// Socket endpoint: one TCP connection per ordered pair of agents. Each agent
// listens on its roster address; peers connect to it and only ever write on
// that connection, so the sender field of the first frame names the channel.

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "mafs/transport.hpp"

namespace mafs {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HostPort {
  std::string host;
  std::string port;
};

inline HostPort split_address(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size())
    throw TransportError("address '" + addr + "' is not host:port");
  return {addr.substr(0, colon), addr.substr(colon + 1)};
}

// Binds port 0 on loopback and reports what the kernel picked.
inline int pick_free_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw TransportError("socket: " + std::string(std::strerror(errno)));
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  sa.sin_port = 0;
  socklen_t len = sizeof sa;
  if (::bind(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) < 0 ||
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&sa), &len) < 0) {
    ::close(fd);
    throw TransportError("bind: " + std::string(std::strerror(errno)));
  }
  ::close(fd);
  return ntohs(sa.sin_port);
}

class TcpEndpoint : public Endpoint {
 public:
  TcpEndpoint(AgentId id, std::vector<std::string> addresses, double connect_timeout = 20.0,
              bool report_failures = false)
      : id_(id),
        addresses_(std::move(addresses)),
        out_(addresses_.size(), -1),
        connect_timeout_(connect_timeout),
        report_failures_(report_failures) {
    if (id_ < 0 || id_ >= static_cast<AgentId>(addresses_.size()))
      throw TransportError("agent id outside the roster");
  }

  ~TcpEndpoint() override { close(); }

  AgentId id() const override { return id_; }
  int num_agents() const override { return static_cast<int>(addresses_.size()); }

  // Listen, then connect to every peer (retrying until they are up).
  void start() {
    listen_fd_ = open_listener(addresses_[id_]);
    acceptor_ = std::thread([this] { accept_loop(); });
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(connect_timeout_));
    for (AgentId k = 0; k < num_agents(); ++k) {
      if (k == id_) continue;
      while ((out_[k] = try_connect(addresses_[k])) < 0) {
        if (std::chrono::steady_clock::now() > deadline)
          throw TransportError("could not reach agent " + std::to_string(k) + " at " + addresses_[k]);
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
    }
  }

  void send(AgentId dest, const Message& m) override {
    if (dest == id_ || dest < 0 || dest >= num_agents()) throw TransportError("bad destination");
    if (out_[dest] < 0) return;  // peer already gone
    const auto frame = encode(m);
    count_sent(m, frame.size());
    std::size_t done = 0;
    while (done < frame.size()) {
      const ssize_t w = ::send(out_[dest], frame.data() + done, frame.size() - done, MSG_NOSIGNAL);
      if (w < 0 && errno == EINTR) continue;
      if (w <= 0) {
        ::close(out_[dest]);
        out_[dest] = -1;
        if (!stopping_) lost(dest);
        return;
      }
      done += static_cast<std::size_t>(w);
    }
  }

  std::vector<Message> poll() override {
    std::vector<Message> out;
    {
      std::lock_guard lock(mu_);
      out.swap(inbox_);
    }
    count_received(out.size());
    return out;
  }

  // Blocks until something arrives or the timeout passes.
  void wait(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return !inbox_.empty(); });
  }

  void close() {
    stopping_ = true;
    if (listen_fd_ >= 0) {
      ::shutdown(listen_fd_, SHUT_RDWR);
      ::close(listen_fd_);
      listen_fd_ = -1;
    }
    for (int& fd : out_)
      if (fd >= 0) {
        ::shutdown(fd, SHUT_RDWR);
        ::close(fd);
        fd = -1;
      }
    {
      std::lock_guard lock(readers_mu_);
      for (int fd : in_fds_) ::shutdown(fd, SHUT_RDWR);
    }
    if (acceptor_.joinable()) acceptor_.join();
    std::lock_guard lock(readers_mu_);
    for (auto& t : readers_)
      if (t.joinable()) t.join();
    readers_.clear();
    for (int fd : in_fds_) ::close(fd);
    in_fds_.clear();
  }

 private:
  static int open_listener(const std::string& addr) {
    const HostPort hp = split_address(addr);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    if (::getaddrinfo(hp.host.c_str(), hp.port.c_str(), &hints, &res) != 0 || !res)
      throw TransportError("cannot resolve " + addr);
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (fd < 0 || ::bind(fd, res->ai_addr, res->ai_addrlen) < 0 || ::listen(fd, 64) < 0) {
      const std::string err = std::strerror(errno);
      ::freeaddrinfo(res);
      if (fd >= 0) ::close(fd);
      throw TransportError("cannot listen on " + addr + ": " + err);
    }
    ::freeaddrinfo(res);
    return fd;
  }

  static int try_connect(const std::string& addr) {
    const HostPort hp = split_address(addr);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(hp.host.c_str(), hp.port.c_str(), &hints, &res) != 0 || !res) return -1;
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) < 0) {
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd >= 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    }
    return fd;
  }

  void accept_loop() {
    for (int accepted = 0; accepted < num_agents() - 1 && !stopping_;) {
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR) continue;
        return;
      }
      ++accepted;
      std::lock_guard lock(readers_mu_);
      in_fds_.push_back(fd);
      readers_.emplace_back([this, fd] { read_loop(fd); });
    }
  }

  static bool read_exact(int fd, std::uint8_t* buf, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
      const ssize_t r = ::recv(fd, buf + got, n - got, 0);
      if (r < 0 && errno == EINTR) continue;
      if (r <= 0) return false;
      got += static_cast<std::size_t>(r);
    }
    return true;
  }

  void read_loop(int fd) {
    AgentId channel = -1;
    while (true) {
      std::vector<std::uint8_t> frame(4);
      if (!read_exact(fd, frame.data(), 4)) break;
      const std::uint32_t len = (std::uint32_t{frame[0]} << 24) | (std::uint32_t{frame[1]} << 16) |
                                (std::uint32_t{frame[2]} << 8) | std::uint32_t{frame[3]};
      if (len > (1u << 28)) break;  // refuse absurd frames
      frame.resize(4 + len);
      if (!read_exact(fd, frame.data() + 4, len)) break;
      Message m;
      try {
        m = decode(frame);
      } catch (const ProtocolError&) {
        break;
      }
      if (channel < 0) channel = m.sender;
      if (m.sender != channel) break;  // one sender per connection
      {
        std::lock_guard lock(mu_);
        inbox_.push_back(std::move(m));
      }
      cv_.notify_one();
    }
    if (!stopping_ && channel >= 0) lost(channel);
  }

  void lost(AgentId peer) {
    if (!report_failures_) return;
    {
      std::lock_guard lock(mu_);
      inbox_.push_back(Message{id_, FailureNoticeMsg{peer}});
    }
    cv_.notify_one();
  }

  AgentId id_;
  std::vector<std::string> addresses_;
  std::vector<int> out_;
  double connect_timeout_;
  bool report_failures_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex readers_mu_;
  std::vector<std::thread> readers_;
  std::vector<int> in_fds_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<Message> inbox_;
};

}  // namespace mafs
