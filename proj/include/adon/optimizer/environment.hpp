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

#ifndef ADON_OPTIMIZER_ENVIRONMENT_HPP_
#define ADON_OPTIMIZER_ENVIRONMENT_HPP_

#include <chrono>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "adon/core/error.hpp"
#include "adon/core/gain_config.hpp"
#include "adon/physics/link.hpp"
#include "adon/scenario/network_state.hpp"
#include "adon/telemetry/record.hpp"
#include "adon/twin/twin.hpp"

namespace adon::opt {

// Something that scores a gain configuration by the worst real-channel Q.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual double evaluate(const GainConfig& config) = 0;
  virtual int tick() const { return 0; }
  // Pure environments may be evaluated from several threads at once.
  virtual bool pure() const { return false; }
};

// Model-based objective. With ground-truth parameters this is the noiseless
// plant; with fitted parameters it is the digital twin.
class TwinEnvironment : public Environment {
 public:
  TwinEnvironment(physics::LinkTopology nominal, twin::TwinParameters params,
                  physics::ChannelGrid grid)
      : nominal_(std::move(nominal)), params_(params), grid_(std::move(grid)) {}

  double evaluate(const GainConfig& config) override { return value(config); }
  bool pure() const override { return true; }

  double value(const GainConfig& config) const {
    if (grid_.real_count() == 0) throw NoActiveChannels("no transponder-carrying channel is lit");
    const auto snap = twin::predict(params_, nominal_, config, grid_);
    const auto q = snap.min_real_q_db();
    if (!q) throw CutLinkError("objective undefined: real channels are dark");
    return *q;
  }

  const twin::TwinParameters& parameters() const { return params_; }
  const physics::ChannelGrid& grid() const { return grid_; }

 private:
  physics::LinkTopology nominal_;
  twin::TwinParameters params_;
  physics::ChannelGrid grid_;
};

inline twin::TwinParameters truth_parameters(const scenario::NetworkState& state) {
  twin::TwinParameters p;
  for (std::size_t s = 0; s < kSpanCount; ++s)
    p.extra_loss_db[s] = state.ground_truth().span_extra_loss_db(s);
  p.nf_db = state.ground_truth().hidden_nf_db;
  return p;
}

inline TwinEnvironment truth_environment(const scenario::NetworkState& state) {
  return {state.nominal(), truth_parameters(state), state.grid()};
}

// Live objective: applies the config to the plant, lets one tick pass and
// reads the worst real-channel Q from noisy telemetry.
class PlantEnvironment : public Environment {
 public:
  using Advance = std::function<void(scenario::NetworkState&)>;

  PlantEnvironment(scenario::NetworkState& state, telemetry::TelemetrySampler& sampler,
                   Advance advance = {})
      : state_(state), sampler_(sampler), advance_(std::move(advance)) {}

  double evaluate(const GainConfig& config) override {
    if (state_.grid().real_count() == 0)
      throw NoActiveChannels("no transponder-carrying channel is lit");
    for (std::size_t s = 0; s < kSpanCount; ++s)
      if (state_.is_cut(s)) throw CutLinkError("objective undefined while span " + std::to_string(s) + " is cut");
    state_.set_config(config);
    if (advance_) advance_(state_);
    else state_.set_tick(state_.tick() + 1);
    last_ = sampler_.sample(state_);
    const auto q = last_->min_q_db();
    if (!q) throw CutLinkError("objective undefined: real channels are dark");
    return *q;
  }

  int tick() const override { return state_.tick(); }
  const std::optional<telemetry::TelemetryRecord>& last_record() const { return last_; }

 private:
  scenario::NetworkState& state_;
  telemetry::TelemetrySampler& sampler_;
  Advance advance_;
  std::optional<telemetry::TelemetryRecord> last_;
};

struct ObjectiveSample {
  std::size_t index = 0;
  GainConfig config;
  double value = 0.0;
  int tick = 0;

  bool operator==(const ObjectiveSample&) const = default;
};

struct OptimizerReport {
  std::string method;
  GainConfig best_config;
  double best_value = 0.0;
  std::vector<ObjectiveSample> trace;
  std::size_t evaluations = 0;
  double wall_time_s = 0.0;

  std::vector<double> best_so_far() const {
    std::vector<double> out;
    for (const auto& s : trace) out.push_back(out.empty() ? s.value : std::max(out.back(), s.value));
    return out;
  }
};

// Wraps an environment, numbers evaluations and tracks the incumbent. Ties
// keep the earlier sample.
class Recorder {
 public:
  Recorder(Environment& env, std::string method)
      : env_(env), start_(std::chrono::steady_clock::now()) {
    report_.method = std::move(method);
  }

  double operator()(const GainConfig& c) {
    const double v = env_.evaluate(c);
    add(c, v, env_.tick());
    return v;
  }

  void add(const GainConfig& c, double v, int tick) {
    report_.trace.push_back({report_.trace.size(), c, v, tick});
    if (report_.trace.size() == 1 || v > report_.best_value) {
      report_.best_value = v;
      report_.best_config = c;
    }
  }

  Environment& env() { return env_; }

  OptimizerReport finish() {
    report_.evaluations = report_.trace.size();
    report_.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return std::move(report_);
  }

 private:
  Environment& env_;
  std::chrono::steady_clock::time_point start_;
  OptimizerReport report_;
};

// One row per evaluation; no wall-clock data so traces stay reproducible.
inline std::string trace_csv_header() {
  std::string h = "index,tick";
  for (std::size_t i = 0; i < kAmplifierCount; ++i) h += ",gain_" + std::to_string(i);
  for (std::size_t i = 0; i < kAmplifierCount; ++i) h += ",tilt_" + std::to_string(i);
  return h + ",value,best";
}

inline void write_trace_csv(std::ostream& os, const OptimizerReport& report) {
  os << trace_csv_header() << '\n';
  const auto best = report.best_so_far();
  for (std::size_t i = 0; i < report.trace.size(); ++i) {
    const auto& s = report.trace[i];
    os << s.index << ',' << s.tick;
    for (double g : s.config.gains_db) os << ',' << format_double(g);
    for (double t : s.config.tilts_db) os << ',' << format_double(t);
    os << ',' << format_double(s.value) << ',' << format_double(best[i]) << '\n';
  }
}

}  // namespace adon::opt

#endif  // ADON_OPTIMIZER_ENVIRONMENT_HPP_
