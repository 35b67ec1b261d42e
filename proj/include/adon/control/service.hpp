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

#ifndef ADON_CONTROL_SERVICE_HPP_
#define ADON_CONTROL_SERVICE_HPP_

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adon/control/log.hpp"
#include "adon/core/error.hpp"
#include "adon/scenario/engine.hpp"
#include "adon/scenario/network_state.hpp"
#include "adon/telemetry/analytics.hpp"
#include "adon/telemetry/json.hpp"
#include "adon/telemetry/record.hpp"

namespace adon::control {

// A concurrent writer holds the configuration, or the caller's revision is stale.
class Conflict : public Error {
 public:
  using Error::Error;
};

// Bounded per-subscriber queue. The producer never waits: once the backlog
// is full the subscription is closed and flagged.
class Subscription {
 public:
  Subscription(std::uint64_t id, telemetry::TelemetryFilter filter, std::size_t backlog)
      : id_(id), filter_(std::move(filter)), backlog_(backlog) {}

  std::uint64_t id() const { return id_; }
  const telemetry::TelemetryFilter& filter() const { return filter_; }

  bool offer(nlohmann::json item) {
    std::lock_guard lock(mu_);
    if (closed_) return false;
    if (queue_.size() >= backlog_) {
      overflowed_ = closed_ = true;
      cv_.notify_all();
      return false;
    }
    queue_.push_back(std::move(item));
    cv_.notify_all();
    return true;
  }

  std::optional<nlohmann::json> pop(std::chrono::milliseconds wait = std::chrono::milliseconds(0)) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, wait, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    auto item = std::move(queue_.front());
    queue_.pop_front();
    return item;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    cv_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_;
  }
  bool overflowed() const {
    std::lock_guard lock(mu_);
    return overflowed_;
  }
  std::size_t pending() const {
    std::lock_guard lock(mu_);
    return queue_.size();
  }

 private:
  std::uint64_t id_;
  telemetry::TelemetryFilter filter_;
  std::size_t backlog_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<nlohmann::json> queue_;
  bool closed_ = false;
  bool overflowed_ = false;
};

struct ServiceOptions {
  std::uint64_t seed = 7;
  double telemetry_sigma_db = 0.1;
  std::size_t subscriber_backlog = 1000;
  std::size_t ring_capacity = 10000;
  std::size_t analytics_window = 400;
  physics::LinkTopology nominal;
  scenario::ServicePolicy service_policy = scenario::ServicePolicy::kDefer;
  // Test hook: runs after an edit is staged and before it is committed.
  std::function<void(const nlohmann::json&)> before_commit;
};

struct StepResult {
  int tick = 0;
  std::vector<scenario::Event> events;
  std::vector<telemetry::Alarm> alarms;
  telemetry::TelemetryRecord record;
};

// The single owner of the plant. Every mutation goes through here; readers
// get copies taken under the lock.
class NetworkService {
 public:
  explicit NetworkService(scenario::Scenario sc, ServiceOptions opt = {})
      : opt_(std::move(opt)),
        state_(opt_.seed, opt_.nominal),
        engine_(std::move(sc)),
        sampler_(opt_.seed, opt_.telemetry_sigma_db),
        buffer_(opt_.ring_capacity) {}

  // Advances the clock by one tick: scenario events, ramps, telemetry,
  // analytics, fan-out.
  StepResult step() {
    std::lock_guard lock(mu_);
    StepResult out;
    out.tick = tick_ + 1;
    out.events = engine_.step(state_, out.tick, opt_.service_policy);
    tick_ = out.tick;
    for (const auto& e : out.events) {
      const bool deferred = e.is_service() && opt_.service_policy == scenario::ServicePolicy::kDefer;
      logs_.append(tick_, Severity::kInfo, "scenario",
                   std::string(deferred ? "service request " : "event ") + e.to_line(),
                   scenario::to_json(e));
    }
    out.record = sampler_.sample(state_);
    buffer_.push(out.record);
    window_.push_back(out.record);
    if (window_.size() > 2 * opt_.analytics_window)
      window_.erase(window_.begin(), window_.end() - static_cast<std::ptrdiff_t>(opt_.analytics_window));
    out.alarms = monitor_.observe(window_);
    for (const auto& a : out.alarms)
      logs_.append(tick_, Severity::kWarning, "analytics", std::string(telemetry::to_string(a.kind)) +
                   " on " + (a.kind == telemetry::AlarmKind::kQDrop ? "channel " : "span ") +
                   std::to_string(a.subject), a.to_json());
    publish(out.record);
    return out;
  }

  int tick() const {
    std::lock_guard lock(mu_);
    return tick_;
  }

  bool finished() const {
    std::lock_guard lock(mu_);
    return engine_.finished(tick_);
  }

  nlohmann::json get_config() const {
    std::lock_guard lock(mu_);
    return config_json();
  }

  // All-or-nothing. Accepted keys: revision, gains_db, tilts_db, amplifiers
  // (list of {id, gain_db?, tilt_db?}), load.
  nlohmann::json edit_config(const nlohmann::json& changes, const std::string& source = "control") {
    std::unique_lock writer(writer_mu_, std::try_to_lock);
    if (!writer.owns_lock()) throw Conflict("another edit-config is in progress");
    if (!changes.is_object()) throw ValidationError("edit-config params must be an object");

    GainConfig next;
    int load = 0;
    std::uint64_t revision = 0;
    {
      std::lock_guard lock(mu_);
      next = state_.config();
      load = state_.load();
      revision = revision_;
    }
    int next_load = load;
    for (const auto& [key, value] : changes.items()) {
      if (key == "revision") {
        if (!value.is_number_integer() || value.get<long long>() < 0 || value.get<std::uint64_t>() != revision)
          throw Conflict("stale revision; current is " + std::to_string(revision));
      } else if (key == "gains_db" || key == "tilts_db") {
        const auto v = value.get<std::vector<double>>();
        if (v.size() != kAmplifierCount) throw ValidationError(key + " needs six values");
        std::copy(v.begin(), v.end(), (key == "gains_db" ? next.gains_db : next.tilts_db).begin());
      } else if (key == "amplifiers") {
        for (const auto& a : value) {
          const auto id = a.at("id").get<long long>();
          if (id < 0 || id >= static_cast<long long>(kAmplifierCount))
            throw ValidationError("amplifier id out of range: " + std::to_string(id));
          for (const auto& [field, v] : a.items()) {
            if (field == "id") continue;
            if (field == "gain_db") next.gains_db[id] = v.get<double>();
            else if (field == "tilt_db") next.tilts_db[id] = v.get<double>();
            else throw ValidationError("unknown amplifier field '" + field + "'");
          }
        }
      } else if (key == "load") {
        next_load = value.get<int>();
        if (next_load < 0 || next_load > scenario::kMaxLoad || next_load % scenario::kBatchSize)
          throw ValidationError("load must be a multiple of 5 in [0, 30]");
      } else {
        throw ValidationError("unknown config key '" + key + "'");
      }
    }
    next.validate();
    if (opt_.before_commit) opt_.before_commit(changes);

    std::lock_guard lock(mu_);
    state_.set_config(next);
    std::vector<int> slots;
    if (next_load != load) slots = scenario::apply_wavelength_change(state_, next_load);
    ++revision_;
    nlohmann::json applied = {{"gains_db", next.gains_db}, {"tilts_db", next.tilts_db},
                              {"load", next_load}, {"changed_slots", slots}, {"revision", revision_},
                              {"tick", tick_}};
    logs_.append(tick_, Severity::kInfo, source, "edit-config " + next.to_string() + " load=" +
                 std::to_string(next_load), applied);
    return applied;
  }

  std::shared_ptr<Subscription> subscribe(telemetry::TelemetryFilter filter) {
    std::lock_guard lock(mu_);
    auto sub = std::make_shared<Subscription>(next_sub_++, std::move(filter), opt_.subscriber_backlog);
    subscribers_.push_back(sub);
    return sub;
  }

  void unsubscribe(std::uint64_t id) {
    std::lock_guard lock(mu_);
    for (auto& s : subscribers_)
      if (s->id() == id) s->close();
    std::erase_if(subscribers_, [&](const auto& s) { return s->id() == id; });
  }

  void inject_event(const scenario::Event& e) {
    std::lock_guard lock(mu_);
    engine_.inject(e);
    logs_.append(tick_, Severity::kInfo, "control", "inject-event " + e.to_line(), scenario::to_json(e));
  }

  std::vector<LogEntry> get_logs(int from_tick, int to_tick) const { return logs_.range(from_tick, to_tick); }
  LogStore& logs() { return logs_; }
  const LogStore& logs() const { return logs_; }

  std::vector<telemetry::TelemetryRecord> telemetry_since(int tick) const {
    std::vector<telemetry::TelemetryRecord> out;
    for (auto& r : buffer_.snapshot())
      if (r.tick >= tick) out.push_back(std::move(r));
    return out;
  }
  std::vector<telemetry::TelemetryRecord> telemetry_last(std::size_t n) const { return buffer_.last(n); }
  std::vector<telemetry::TelemetryRecord> telemetry_all() const { return buffer_.snapshot(); }

  // Copy of the plant, hidden parameters included. For the orchestrator and
  // evaluation code only; the agent never sees it.
  scenario::NetworkState state_copy() const {
    std::lock_guard lock(mu_);
    return state_;
  }

  const physics::LinkTopology& nominal() const { return opt_.nominal; }
  const ServiceOptions& options() const { return opt_; }

 private:
  nlohmann::json config_json() const {
    nlohmann::json amps = nlohmann::json::array();
    const auto& c = state_.config();
    for (std::size_t k = 0; k < kAmplifierCount; ++k)
      amps.push_back({{"id", k}, {"gain_db", c.gains_db[k]}, {"tilt_db", c.tilts_db[k]}});
    nlohmann::json spans = nlohmann::json::array();
    for (std::size_t s = 0; s < kSpanCount; ++s) {
      const auto& sp = opt_.nominal.spans[s];
      spans.push_back({{"id", s}, {"length_km", sp.length_km},
                       {"attenuation_db_per_km", sp.attenuation_db_per_km}});
    }
    return {{"tick", tick_},
            {"revision", revision_},
            {"amplifiers", amps},
            {"spans", spans},
            {"grid", {{"load", state_.load()},
                      {"active", telemetry::detail::to_bits(state_.grid().active)},
                      {"real", telemetry::detail::to_bits(state_.grid().is_real)}}},
            {"launch_power_dbm", opt_.nominal.launch_power_dbm}};
  }

  void publish(const telemetry::TelemetryRecord& r) {
    for (auto& sub : subscribers_) {
      if (sub->offer(sub->filter().apply(r))) continue;
      if (sub->overflowed())
        logs_.append(tick_, Severity::kError, "control",
                     "subscription " + std::to_string(sub->id()) + " dropped: backlog overflow",
                     {{"subscription", sub->id()}, {"backlog", opt_.subscriber_backlog}});
    }
    std::erase_if(subscribers_, [](const auto& s) { return s->closed(); });
  }

  ServiceOptions opt_;
  mutable std::mutex mu_;
  std::mutex writer_mu_;
  scenario::NetworkState state_;
  scenario::ScenarioEngine engine_;
  telemetry::TelemetrySampler sampler_;
  telemetry::RingBuffer<telemetry::TelemetryRecord> buffer_;
  std::vector<telemetry::TelemetryRecord> window_;
  telemetry::AlarmMonitor monitor_;
  LogStore logs_;
  std::vector<std::shared_ptr<Subscription>> subscribers_;
  std::uint64_t next_sub_ = 1;
  std::uint64_t revision_ = 0;
  int tick_ = -1;
};

}  // namespace adon::control

#endif  // ADON_CONTROL_SERVICE_HPP_
