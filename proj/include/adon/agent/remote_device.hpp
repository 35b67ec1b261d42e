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


#ifndef ADON_AGENT_REMOTE_DEVICE_HPP_
#define ADON_AGENT_REMOTE_DEVICE_HPP_

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adon/agent/device.hpp"
#include "adon/control/client.hpp"
#include "adon/telemetry/json.hpp"

namespace adon::agent {

// A device on the other end of a control-plane connection. The server owns
// the clock; advancing means waiting for enough telemetry to arrive.
class RemoteDevice : public Device {
 public:
  explicit RemoteDevice(control::Client& client, std::chrono::milliseconds wait_limit = std::chrono::seconds(30))
      : client_(client), wait_limit_(wait_limit) {
    const auto res = client_.subscribe(
        nlohmann::json::object(),
        [this](const nlohmann::json& item) {
          auto rec = telemetry::record_from_json(item);
          std::lock_guard lock(mu_);
          records_.push_back(std::move(rec));
          cv_.notify_all();
        },
        [this](const std::optional<control::ErrorBody>& err) {
          std::lock_guard lock(mu_);
          ended_ = true;
          if (err) end_error_ = err->message;
          cv_.notify_all();
        });
    std::lock_guard lock(mu_);
    committed_ = res.at("tick").get<int>();
  }

  int tick() override {
    std::lock_guard lock(mu_);
    return current();
  }

  nlohmann::json get_config() override { return client_.call("get-config"); }

  nlohmann::json edit_config(const nlohmann::json& changes) override {
    auto applied = client_.call("edit-config", changes);
    std::lock_guard lock(mu_);
    committed_ = std::max(committed_, applied.at("tick").get<int>());
    return applied;
  }

  std::vector<telemetry::TelemetryRecord> telemetry_since(int tick) override {
    std::lock_guard lock(mu_);
    auto it = std::lower_bound(records_.begin(), records_.end(), tick,
                               [](const telemetry::TelemetryRecord& r, int t) { return r.tick < t; });
    return {it, records_.end()};
  }

  std::vector<control::LogEntry> get_logs(int from_tick, int to_tick) override {
    const auto res = client_.call("get-logs", {{"from", from_tick}, {"to", to_tick}});
    std::vector<control::LogEntry> out;
    for (const auto& e : res.at("entries")) out.push_back(control::log_entry_from_json(e));
    return out;
  }

  void advance(int ticks) override {
    std::unique_lock lock(mu_);
    const int target = current() + ticks;
    if (!cv_.wait_for(lock, wait_limit_, [&] { return latest() >= target || ended_; }))
      throw Error("no telemetry for tick " + std::to_string(target));
    if (latest() < target)
      throw Error("scenario ended while the agent was waiting" + (end_error_.empty() ? "" : " (" + end_error_ + ")"));
  }

  // Blocks until a record newer than `tick` arrives; false once the stream has ended.
  bool wait_beyond(int tick) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return latest() > tick || ended_; });
    return latest() > tick;
  }

  bool ended() const {
    std::lock_guard lock(mu_);
    return ended_;
  }

  std::vector<telemetry::TelemetryRecord> all_records() const {
    std::lock_guard lock(mu_);
    return records_;
  }

 private:
  int latest() const { return records_.empty() ? -1 : records_.back().tick; }
  int current() const { return std::max(latest(), committed_); }

  control::Client& client_;
  std::chrono::milliseconds wait_limit_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::vector<telemetry::TelemetryRecord> records_;
  int committed_ = -1;
  bool ended_ = false;
  std::string end_error_;
};

}  // namespace adon::agent

#endif  // ADON_AGENT_REMOTE_DEVICE_HPP_
