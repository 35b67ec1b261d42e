// Copyright 2026 The ADON Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef ADON_CONTROL_SOCKET_HPP_
#define ADON_CONTROL_SOCKET_HPP_

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "adon/core/error.hpp"

namespace adon::control {

// Line-oriented view of a connected TCP socket. Reads and writes may run on
// different threads; writes are serialized.
class LineSocket {
 public:
  static constexpr std::size_t kMaxLine = 16u << 20;

  explicit LineSocket(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~LineSocket() { close(); }
  LineSocket(const LineSocket&) = delete;
  LineSocket& operator=(const LineSocket&) = delete;

  static std::unique_ptr<LineSocket> connect(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) throw ValidationError("bad IPv4 address: " + host);
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw Error(std::string("socket: ") + std::strerror(errno));
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      const int err = errno;
      ::close(fd);
      throw Error("connect " + host + ":" + std::to_string(port) + ": " + std::strerror(err));
    }
    return std::make_unique<LineSocket>(fd);
  }

  // Next line without its terminator; nullopt on orderly close.
  std::optional<std::string> read_line() {
    for (;;) {
      if (const auto nl = buf_.find('\n', scanned_); nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        scanned_ = 0;
        return line;
      }
      scanned_ = buf_.size();
      if (buf_.size() > kMaxLine) throw ValidationError("line exceeds 16 MiB");
      char chunk[65536];
      const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
      if (n == 0) return std::nullopt;
      if (n < 0) {
        if (errno == EINTR) continue;
        return std::nullopt;
      }
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  // Writes `line` plus a newline. With a send timeout set, `keep_going` is
  // polled between timeouts; returning false abandons the write.
  bool write_line(std::string_view line, const std::function<bool()>& keep_going = {}) {
    std::lock_guard lock(write_mu_);
    std::string out(line);
    out += '\n';
    std::size_t off = 0;
    while (off < out.size()) {
      const ssize_t n = ::send(fd_, out.data() + off, out.size() - off, MSG_NOSIGNAL);
      if (n > 0) {
        off += static_cast<std::size_t>(n);
        continue;
      }
      if (n < 0 && errno == EINTR) continue;
      if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK) && (!keep_going || keep_going())) continue;
      at_boundary_ = off == 0;
      return false;
    }
    at_boundary_ = true;
    return true;
  }

  // False once a write was abandoned halfway through a line; nothing more
  // can be framed on this connection.
  bool at_boundary() const { return at_boundary_; }

  void set_send_timeout(std::chrono::milliseconds t) {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(t.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((t.count() % 1000) * 1000);
    ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
  }

  // Wakes a blocked reader on another thread.
  void shutdown() { ::shutdown(fd_, SHUT_RDWR); }

  void close() {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  int fd_;
  std::mutex write_mu_;
  std::string buf_;
  std::size_t scanned_ = 0;
  std::atomic<bool> at_boundary_{true};
};

}  // namespace adon::control

#endif  // ADON_CONTROL_SOCKET_HPP_
