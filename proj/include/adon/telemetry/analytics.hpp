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

#ifndef ADON_TELEMETRY_ANALYTICS_HPP_
#define ADON_TELEMETRY_ANALYTICS_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "adon/core/error.hpp"
#include "adon/telemetry/record.hpp"

namespace adon::telemetry {

enum class AlarmKind { kQDrop, kLossOfSignal, kDegradationForecast };

inline const char* to_string(AlarmKind k) {
  switch (k) {
    case AlarmKind::kQDrop: return "QDrop";
    case AlarmKind::kLossOfSignal: return "LossOfSignal";
    case AlarmKind::kDegradationForecast: return "DegradationForecast";
  }
  return "?";
}

struct Alarm {
  AlarmKind kind = AlarmKind::kQDrop;
  int tick = 0;
  int subject = -1;  // channel slot (QDrop) or span id (LOS, forecast)
  nlohmann::json detail = nlohmann::json::object();

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind);
    j["tick"] = tick;
    j["subject"] = subject;
    j["detail"] = detail;
    return j;
  }

  static Alarm from_json(const nlohmann::json& j) {
    Alarm a;
    const auto kind = j.at("kind").get<std::string>();
    bool known = false;
    for (AlarmKind k : {AlarmKind::kQDrop, AlarmKind::kLossOfSignal, AlarmKind::kDegradationForecast})
      if (kind == to_string(k)) {
        a.kind = k;
        known = true;
      }
    if (!known) throw ValidationError("unknown alarm kind '" + kind + "'");
    a.tick = j.at("tick").get<int>();
    a.subject = j.at("subject").get<int>();
    a.detail = j.value("detail", nlohmann::json::object());
    return a;
  }
};

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Records sharing the newest record's configuration epoch.
inline std::span<const TelemetryRecord> current_epoch(std::span<const TelemetryRecord> records) {
  if (records.empty()) return records;
  const auto epoch = records.back().epoch;
  std::size_t first = records.size();
  while (first > 0 && records[first - 1].epoch == epoch) --first;
  return records.subspan(first);
}

}  // namespace detail

struct QDropOptions {
  double threshold_db = 1.0;
  std::size_t recent = 5;
  std::size_t baseline = 50;
};

// Median of the last few Q samples against the median of the samples before
// them, per real channel, within the current configuration epoch. Reports the
// channel with the largest drop.
inline std::optional<Alarm> detect_q_drop(std::span<const TelemetryRecord> records,
                                          const QDropOptions& opt = {}) {
  const auto epoch = detail::current_epoch(records);
  if (epoch.empty()) return std::nullopt;
  const auto& latest = epoch.back();
  std::optional<Alarm> worst;
  double worst_drop = 0.0;
  for (std::size_t slot = 0; slot < latest.q_db.size(); ++slot) {
    if (!latest.q_db[slot]) continue;
    std::vector<double> series;
    for (const auto& r : epoch)
      if (slot < r.q_db.size() && r.q_db[slot]) series.push_back(*r.q_db[slot]);
    if (series.size() < 2) continue;
    const std::size_t recent = std::min(opt.recent, series.size() - 1);
    const std::size_t base_end = series.size() - recent;
    const std::size_t base_begin = base_end > opt.baseline ? base_end - opt.baseline : 0;
    const double now = detail::median({series.end() - recent, series.end()});
    const double base = detail::median({series.begin() + base_begin, series.begin() + base_end});
    const double drop = base - now;
    if (drop >= opt.threshold_db && drop > worst_drop) {
      worst_drop = drop;
      Alarm a;
      a.kind = AlarmKind::kQDrop;
      a.tick = latest.tick;
      a.subject = static_cast<int>(slot);
      a.detail = {{"channel", slot}, {"baseline_q_db", base}, {"recent_q_db", now}, {"drop_db", drop}};
      worst = a;
    }
  }
  return worst;
}

struct ForecastResult {
  double slope = 0.0;      // dB per tick
  double intercept = 0.0;  // fitted value at tick 0
  double predicted_loss_at_horizon = 0.0;
  bool triggered = false;
};

struct ForecastOptions {
  std::size_t window = 50;
  double horizon_ticks = 100.0;
  double trigger_loss_db = 5.0;
};

// Ordinary least squares over the last `window` (tick, dB) points.
inline ForecastResult forecast_power(std::span<const std::pair<double, double>> series,
                                     const ForecastOptions& opt = {}) {
  if (opt.window < 2 || series.size() < opt.window)
    throw InsufficientData("forecast needs " + std::to_string(opt.window) + " samples, have " +
                           std::to_string(series.size()));
  const auto pts = series.subspan(series.size() - opt.window);
  double tm = 0.0, ym = 0.0;
  for (const auto& [t, y] : pts) {
    tm += t;
    ym += y;
  }
  tm /= static_cast<double>(pts.size());
  ym /= static_cast<double>(pts.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [t, y] : pts) {
    sxy += (t - tm) * (y - ym);
    sxx += (t - tm) * (t - tm);
  }
  if (sxx == 0.0) throw InsufficientData("forecast window has a single distinct tick");
  ForecastResult r;
  r.slope = sxy / sxx;
  r.intercept = ym - r.slope * tm;
  r.predicted_loss_at_horizon = r.slope < 0.0 ? -r.slope * opt.horizon_ticks : 0.0;
  r.triggered = r.predicted_loss_at_horizon >= opt.trigger_loss_db;
  return r;
}

// Span transmission (downstream amp input minus upstream amp output, dB) over
// healthy records. Independent of gains and load, so reconfiguration does not
// look like degradation.
inline std::vector<std::pair<double, double>> span_transmission_series(
    std::span<const TelemetryRecord> records, std::size_t span) {
  std::vector<std::pair<double, double>> out;
  for (const auto& r : records) {
    if (!r.all_osc_alive()) continue;
    const double in = r.amp_in_dbm[span + 1];
    const double up = r.amp_out_dbm[span];
    if (in <= kPowerFloorDbm || up <= kPowerFloorDbm) continue;
    out.emplace_back(static_cast<double>(r.tick), in - up);
  }
  return out;
}

struct LosOptions {
  double dark_input_dbm = -40.0;
  double lit_output_dbm = -20.0;
};

// Loss of signal per span: dead OSC, or a dark downstream input while the
// upstream amplifier is lit and itself has input. The last clause suppresses
// sympathetic alarms behind an upstream cut.
inline std::vector<Alarm> detect_los(const TelemetryRecord& r, const LosOptions& opt = {}) {
  std::vector<Alarm> out;
  for (std::size_t s = 0; s < kSpanCount; ++s) {
    const bool osc_dead = !r.osc_alive[s];
    const bool power_los = r.amp_in_dbm[s + 1] < opt.dark_input_dbm &&
                           r.amp_out_dbm[s] >= opt.lit_output_dbm &&
                           r.amp_in_dbm[s] >= opt.dark_input_dbm;
    if (!osc_dead && !power_los) continue;
    Alarm a;
    a.kind = AlarmKind::kLossOfSignal;
    a.tick = r.tick;
    a.subject = static_cast<int>(s);
    a.detail = {{"span", s},
                {"osc_alive", !osc_dead},
                {"downstream_input_dbm", r.amp_in_dbm[s + 1]},
                {"upstream_output_dbm", r.amp_out_dbm[s]}};
    out.push_back(a);
  }
  return out;
}

// Runs all detectors on each new sample and raises an alarm only on the
// rising edge of its condition.
class AlarmMonitor {
 public:
  QDropOptions q_drop;
  ForecastOptions forecast;
  LosOptions los;
  std::size_t history = 400;

  std::vector<Alarm> observe(std::span<const TelemetryRecord> records) {
    std::vector<Alarm> raised;
    if (records.empty()) return raised;
    const auto& latest = records.back();
    std::map<std::pair<AlarmKind, int>, Alarm> now;

    for (auto& a : detect_los(latest, los)) now.emplace(std::make_pair(a.kind, a.subject), a);
    if (auto q = detect_q_drop(records, q_drop)) now.emplace(std::make_pair(q->kind, -1), *q);
    for (std::size_t s = 0; s < kSpanCount; ++s) {
      const auto series = span_transmission_series(records, s);
      if (series.size() < forecast.window || series.back().first != latest.tick) continue;
      const auto f = forecast_power(series, forecast);
      if (!f.triggered) continue;
      Alarm a;
      a.kind = AlarmKind::kDegradationForecast;
      a.tick = latest.tick;
      a.subject = static_cast<int>(s);
      a.detail = {{"span", s},
                  {"slope_db_per_tick", f.slope},
                  {"predicted_loss_db", f.predicted_loss_at_horizon},
                  {"horizon_ticks", forecast.horizon_ticks}};
      now.emplace(std::make_pair(a.kind, a.subject), a);
    }

    for (auto& [key, alarm] : now)
      if (!active_.count(key)) raised.push_back(alarm);
    active_.clear();
    for (auto& [key, alarm] : now) active_.insert(key);
    return raised;
  }

  void reset() { active_.clear(); }

 private:
  std::set<std::pair<AlarmKind, int>> active_;
};

}  // namespace adon::telemetry

#endif  // ADON_TELEMETRY_ANALYTICS_HPP_
