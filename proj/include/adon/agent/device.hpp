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

#ifndef ADON_AGENT_DEVICE_HPP_
#define ADON_AGENT_DEVICE_HPP_

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adon/control/log.hpp"
#include "adon/control/service.hpp"
#include "adon/core/gain_config.hpp"
#include "adon/optimizer/environment.hpp"
#include "adon/physics/link.hpp"
#include "adon/telemetry/json.hpp"
#include "adon/telemetry/record.hpp"

namespace adon::agent {

// What the agent can do to the line: the control-plane verbs plus waiting.
class Device {
 public:
  virtual ~Device() = default;
  virtual int tick() = 0;
  virtual nlohmann::json get_config() = 0;
  virtual nlohmann::json edit_config(const nlohmann::json& changes) = 0;
  virtual std::vector<telemetry::TelemetryRecord> telemetry_since(int tick) = 0;
  virtual std::vector<control::LogEntry> get_logs(int from_tick, int to_tick) = 0;
  // Returns once the clock has moved `ticks` ticks.
  virtual void advance(int ticks) = 0;
};

// In-process device. `step` is the owner's clock callback, so whatever the
// owner does per tick (alarm routing, twin sync) also happens while the
// agent waits.
class LocalDevice : public Device {
 public:
  LocalDevice(control::NetworkService& service, std::function<void()> step, std::string source = "agent")
      : service_(service), step_(std::move(step)), source_(std::move(source)) {}

  int tick() override { return service_.tick(); }
  nlohmann::json get_config() override { return service_.get_config(); }
  nlohmann::json edit_config(const nlohmann::json& changes) override {
    return service_.edit_config(changes, source_);
  }
  std::vector<telemetry::TelemetryRecord> telemetry_since(int tick) override {
    return service_.telemetry_since(tick);
  }
  std::vector<control::LogEntry> get_logs(int from_tick, int to_tick) override {
    return service_.get_logs(from_tick, to_tick);
  }
  void advance(int ticks) override {
    for (int i = 0; i < ticks; ++i) {
      if (service_.finished()) throw Error("scenario ended while the agent was waiting");
      step_();
    }
  }

 private:
  control::NetworkService& service_;
  std::function<void()> step_;
  std::string source_;
};

inline GainConfig config_of(const nlohmann::json& tree) {
  GainConfig c;
  for (const auto& a : tree.at("amplifiers")) {
    const auto id = a.at("id").get<std::size_t>();
    c.gains_db.at(id) = a.at("gain_db").get<double>();
    c.tilts_db.at(id) = a.at("tilt_db").get<double>();
  }
  return c;
}

inline physics::ChannelGrid grid_of(const nlohmann::json& tree, physics::ChannelGrid base) {
  base.active = telemetry::detail::from_bits(tree.at("grid").at("active").get<std::string>());
  base.is_real = telemetry::detail::from_bits(tree.at("grid").at("real").get<std::string>());
  return base;
}

inline std::optional<std::size_t> first_dark_span(const telemetry::TelemetryRecord& r) {
  for (std::size_t s = 0; s < kSpanCount; ++s)
    if (!r.osc_alive[s]) return s;
  return std::nullopt;
}

// Live line as an optimization target: apply, wait one tick, read min-Q.
class DeviceEnvironment : public opt::Environment {
 public:
  explicit DeviceEnvironment(Device& device) : device_(device) {}

  double evaluate(const GainConfig& config) override {
    device_.edit_config({{"gains_db", config.gains_db}, {"tilts_db", config.tilts_db}});
    const int before = device_.tick();
    device_.advance(1);
    const auto recs = device_.telemetry_since(before + 1);
    if (recs.empty()) throw Error("no telemetry after applying " + config.to_string());
    const auto& r = recs.back();
    if (auto s = first_dark_span(r)) throw CutLinkError("span " + std::to_string(*s) + " is dark");
    const auto q = r.min_q_db();
    if (!q) throw NoActiveChannels("no Q reported at tick " + std::to_string(r.tick));
    return *q;
  }

  int tick() const override { return device_.tick(); }

 private:
  Device& device_;
};

}  // namespace adon::agent

#endif  // ADON_AGENT_DEVICE_HPP_
