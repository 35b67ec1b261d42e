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


#ifndef ADON_CONTROL_SERVER_HPP_
#define ADON_CONTROL_SERVER_HPP_

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstring>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "adon/control/protocol.hpp"
#include "adon/control/service.hpp"
#include "adon/control/socket.hpp"

namespace adon::control {

// Newline-delimited JSON over TCP on the loopback interface. One thread per
// session plus one pump thread per telemetry subscription.
class TcpServer {
 public:
  explicit TcpServer(NetworkService& service, std::uint16_t port = 0) : service_(service) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw Error(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(listen_fd_, 16) != 0) {
      const int err = errno;
      ::close(listen_fd_);
      throw Error("cannot listen on port " + std::to_string(port) + ": " + std::strerror(err));
    }
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    accept_thread_ = std::thread([this] { accept_loop(); });
  }

  ~TcpServer() { stop(); }
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const { return port_; }

  // Closes every subscription; pumps flush what is queued and then send an
  // end-of-stream item.
  void end_streams() {
    std::lock_guard lock(mu_);
    for (auto& s : sessions_)
      for (auto& sub : s->subs) service_.unsubscribe(sub->id());
  }

  void stop() {
    if (stopping_.exchange(true)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (accept_thread_.joinable()) accept_thread_.join();
    std::list<std::unique_ptr<Session>> sessions;
    {
      std::lock_guard lock(mu_);
      sessions.swap(sessions_);
    }
    for (auto& s : sessions) s->socket->shutdown();
    for (auto& s : sessions)
      if (s->reader.joinable()) s->reader.join();
  }

 private:
  struct Session {
    std::unique_ptr<LineSocket> socket;
    std::thread reader;
    std::vector<std::thread> pumps;
    std::vector<std::shared_ptr<Subscription>> subs;
  };

  void accept_loop() {
    while (!stopping_) {
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR) continue;
        return;
      }
      auto s = std::make_unique<Session>();
      s->socket = std::make_unique<LineSocket>(fd);
      s->socket->set_send_timeout(std::chrono::milliseconds(50));
      Session* raw = s.get();
      std::lock_guard lock(mu_);
      if (stopping_) return;
      sessions_.push_back(std::move(s));
      raw->reader = std::thread([this, raw] { serve(*raw); });
    }
  }

  void serve(Session& s) {
    Dispatcher dispatcher(service_);
    while (auto line = s.socket->read_line()) {
      if (line->empty()) continue;
      auto [reply, sub] = dispatcher.handle_line(*line);
      if (!s.socket->write_line(reply, [this] { return !stopping_.load(); })) break;
      if (sub) {
        const auto id = decode_response(reply).id;
        std::lock_guard lock(mu_);
        s.subs.push_back(sub);
        s.pumps.emplace_back([this, &s, sub, id] { pump(s, sub, id); });
      }
    }
    std::vector<std::thread> pumps;
    {
      std::lock_guard lock(mu_);
      for (auto& sub : s.subs) service_.unsubscribe(sub->id());
      pumps.swap(s.pumps);
    }
    s.socket->shutdown();
    for (auto& t : pumps) t.join();
  }

  // A line already on the wire is finished if the client drains it within
  // the grace period, so the overflow error stays correctly framed.
  void pump(Session& s, std::shared_ptr<Subscription> sub, std::uint64_t request_id) {
    std::optional<std::chrono::steady_clock::time_point> dropped_at;
    auto keep_going = [&] {
      if (stopping_) return false;
      if (!sub->overflowed()) return true;
      if (!dropped_at) dropped_at = std::chrono::steady_clock::now();
      return std::chrono::steady_clock::now() - *dropped_at < kOverflowGrace;
    };
    for (;;) {
      if (sub->overflowed()) {
        if (s.socket->at_boundary()) s.socket->write_line(encode(Dispatcher::overflow(request_id)), keep_going);
        s.socket->shutdown();
        return;
      }
      auto item = sub->pop(std::chrono::milliseconds(100));
      if (item) {
        if (!s.socket->write_line(encode(Dispatcher::stream_item(request_id, std::move(*item))), keep_going) &&
            !sub->overflowed())
          return;
      } else if (sub->closed()) {
        s.socket->write_line(encode(Response::ok(request_id, {{"end", true}})), keep_going);
        return;
      } else if (stopping_) {
        return;
      }
    }
  }

  static constexpr auto kOverflowGrace = std::chrono::seconds(10);

  NetworkService& service_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex mu_;
  std::list<std::unique_ptr<Session>> sessions_;
};

}  // namespace adon::control

#endif  // ADON_CONTROL_SERVER_HPP_
