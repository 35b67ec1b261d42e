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

#ifndef ADON_TELEMETRY_RECORD_HPP_
#define ADON_TELEMETRY_RECORD_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <random>
#include <vector>

#include "adon/core/gain_config.hpp"
#include "adon/core/units.hpp"
#include "adon/scenario/network_state.hpp"

namespace adon::telemetry {

inline constexpr double kPowerFloorDbm = -60.0;

// One OSC telemetry sample. Carries the device configuration it was taken
// under so the twin can replay it.
struct TelemetryRecord {
  int tick = 0;
  std::uint64_t epoch = 0;  // bumps on every configuration or occupancy change
  GainConfig config;
  std::vector<bool> active;
  std::vector<bool> real;
  std::array<double, kAmplifierCount> amp_in_dbm{};
  std::array<double, kAmplifierCount> amp_out_dbm{};
  std::array<bool, kSpanCount> osc_alive{};
  std::vector<std::optional<double>> rx_dbm;  // per slot; empty when inactive
  std::vector<std::optional<double>> q_db;    // per slot; real channels with signal only

  bool all_osc_alive() const {
    return std::all_of(osc_alive.begin(), osc_alive.end(), [](bool b) { return b; });
  }

  std::optional<double> min_q_db() const {
    std::optional<double> worst;
    for (const auto& q : q_db)
      if (q && (!worst || *q < *worst)) worst = q;
    return worst;
  }

  int load() const {
    return static_cast<int>(std::count(active.begin(), active.end(), true));
  }

  bool operator==(const TelemetryRecord&) const = default;
};

inline double clamp_floor(double dbm) { return std::max(dbm, kPowerFloorDbm); }

// Turns plant state into noisy telemetry. All noise comes from one seeded
// stream, drawn in a fixed order.
class TelemetrySampler {
 public:
  explicit TelemetrySampler(std::uint64_t seed, double sigma_db = 0.1)
      : rng_(seed ^ 0x5eed'7e1e'0000'0001ULL), sigma_(sigma_db) {}

  double sigma_db() const { return sigma_; }

  TelemetryRecord sample(const scenario::NetworkState& state) {
    return sample(state, state.evaluate());
  }

  TelemetryRecord sample(const scenario::NetworkState& state, const physics::LinkSnapshot& snap) {
    TelemetryRecord r;
    r.tick = state.tick();
    r.epoch = state.config_epoch();
    r.config = state.config();
    r.active = state.grid().active;
    r.real = state.grid().is_real;
    for (std::size_t k = 0; k < kAmplifierCount; ++k) {
      r.amp_in_dbm[k] = clamp_floor(watts_to_dbm(snap.amp_input_power_w[k]) + noise());
      r.amp_out_dbm[k] = clamp_floor(watts_to_dbm(snap.amp_output_power_w[k]) + noise());
    }
    for (std::size_t s = 0; s < kSpanCount; ++s) r.osc_alive[s] = !state.is_cut(s);
    const int slots = state.grid().slot_count;
    r.rx_dbm.assign(slots, std::nullopt);
    r.q_db.assign(slots, std::nullopt);
    for (const auto& c : snap.channels) {
      r.rx_dbm[c.slot] = clamp_floor(watts_to_dbm(c.received_power_w) + noise());
      if (c.is_real && c.q_factor_db) r.q_db[c.slot] = *c.q_factor_db + noise();
    }
    return r;
  }

 private:
  double noise() {
    if (sigma_ == 0.0) return 0.0;
    return sigma_ * normal_(rng_);
  }

  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double sigma_;
};

// Bounded FIFO shared between the single writer and any number of readers.
// Readers get copies, so a view never changes under them.
template <class T>
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity = 10000) : capacity_(capacity) {}

  void push(T value) {
    std::lock_guard lock(mu_);
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(value));
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return items_.size();
  }
  std::size_t capacity() const { return capacity_; }

  std::vector<T> snapshot() const {
    std::lock_guard lock(mu_);
    return {items_.begin(), items_.end()};
  }

  std::vector<T> last(std::size_t n) const {
    std::lock_guard lock(mu_);
    n = std::min(n, items_.size());
    return {items_.end() - static_cast<std::ptrdiff_t>(n), items_.end()};
  }

  std::optional<T> latest() const {
    std::lock_guard lock(mu_);
    if (items_.empty()) return std::nullopt;
    return items_.back();
  }

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::deque<T> items_;
};

}  // namespace adon::telemetry

#endif  // ADON_TELEMETRY_RECORD_HPP_
