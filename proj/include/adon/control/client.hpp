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


#ifndef ADON_CONTROL_CLIENT_HPP_
#define ADON_CONTROL_CLIENT_HPP_

#include <atomic>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "adon/control/protocol.hpp"
#include "adon/control/socket.hpp"

namespace adon::control {

// Error responses come back as the matching exception type.
[[noreturn]] inline void raise(const ErrorBody& e) {
  const std::string msg = "remote error " + std::to_string(e.code) + ": " + e.message;
  if (e.code == kConflict) throw Conflict(msg);
  if (e.code == kBadRequest || e.code == kNotFound) throw ValidationError(msg);
  throw Error(msg);
}

class Client {
 public:
  using ItemFn = std::function<void(const nlohmann::json&)>;
  // Called once when a stream stops; carries the error if it did not end cleanly.
  using EndFn = std::function<void(const std::optional<ErrorBody>&)>;

  Client(const std::string& host, std::uint16_t port) : socket_(LineSocket::connect(host, port)) {
    reader_ = std::thread([this] { read_loop(); });
  }

  ~Client() { close(); }
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  nlohmann::json call(const std::string& method, nlohmann::json params = nlohmann::json::object()) {
    auto [id, fut] = send(method, std::move(params), nullptr);
    const Response r = fut.get();
    if (r.error) raise(*r.error);
    return *r.result;
  }

  // Returns the subscribe result ({subscription, tick}). Stream callbacks run
  // on the reader thread, in wire order.
  nlohmann::json subscribe(nlohmann::json filter, ItemFn on_item, EndFn on_end) {
    auto stream = std::make_shared<Stream>(Stream{std::move(on_item), std::move(on_end)});
    auto [id, fut] = send("subscribe-telemetry", {{"filter", std::move(filter)}}, stream);
    const Response r = fut.get();
    if (r.error) raise(*r.error);
    return *r.result;
  }

  void close() {
    if (closed_.exchange(true)) return;
    socket_->shutdown();
    if (reader_.joinable()) reader_.join();
  }

 private:
  struct Stream {
    ItemFn on_item;
    EndFn on_end;
  };

  std::pair<std::uint64_t, std::future<Response>> send(const std::string& method, nlohmann::json params,
                                                       std::shared_ptr<Stream> stream) {
    std::promise<Response> p;
    auto fut = p.get_future();
    std::uint64_t id = 0;
    {
      std::lock_guard lock(mu_);
      if (disconnected_) throw Error("connection closed");
      id = next_id_++;
      pending_.emplace(id, std::move(p));
      if (stream) streams_.emplace(id, std::move(stream));
    }
    if (!socket_->write_line(encode(Request{id, method, std::move(params)}))) {
      std::lock_guard lock(mu_);
      pending_.erase(id);
      streams_.erase(id);
      throw Error("connection closed while sending " + method);
    }
    return {id, std::move(fut)};
  }

  void read_loop() {
    while (auto line = socket_->read_line()) {
      Response r;
      try {
        r = decode_response(*line);
      } catch (const Error&) {
        break;
      }
      std::shared_ptr<Stream> stream;
      {
        std::lock_guard lock(mu_);
        if (auto it = pending_.find(r.id); it != pending_.end()) {
          if (r.error) streams_.erase(r.id);
          it->second.set_value(std::move(r));
          pending_.erase(it);
          continue;
        }
        if (auto it = streams_.find(r.id); it != streams_.end()) {
          stream = it->second;
          if (r.error || !r.result->contains("telemetry")) streams_.erase(it);
        }
      }
      if (!stream) continue;
      if (r.error) stream->on_end(r.error);
      else if (r.result->contains("telemetry")) stream->on_item(r.result->at("telemetry"));
      else stream->on_end(std::nullopt);
    }
    std::map<std::uint64_t, std::promise<Response>> pending;
    std::map<std::uint64_t, std::shared_ptr<Stream>> streams;
    {
      std::lock_guard lock(mu_);
      disconnected_ = true;
      pending.swap(pending_);
      streams.swap(streams_);
    }
    for (auto& [id, p] : pending) p.set_value(Response::fail(id, kInternal, "connection closed"));
    for (auto& [id, s] : streams) s->on_end(ErrorBody{kInternal, "connection closed"});
  }

  std::unique_ptr<LineSocket> socket_;
  std::thread reader_;
  std::atomic<bool> closed_{false};
  std::mutex mu_;
  bool disconnected_ = false;
  std::uint64_t next_id_ = 1;
  std::map<std::uint64_t, std::promise<Response>> pending_;
  std::map<std::uint64_t, std::shared_ptr<Stream>> streams_;
};

}  // namespace adon::control

#endif  // ADON_CONTROL_CLIENT_HPP_
