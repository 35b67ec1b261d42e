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

#ifndef ADON_AGENT_FAILURE_HPP_
#define ADON_AGENT_FAILURE_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adon/agent/grammar.hpp"
#include "adon/agent/plan.hpp"
#include "adon/core/error.hpp"
#include "adon/core/gain_config.hpp"
#include "adon/telemetry/record.hpp"

namespace adon::agent {

class LocalizationFailed : public Error {
 public:
  using Error::Error;
};

enum class FailureKind { kCut, kAging };

inline const char* to_string(FailureKind k) { return k == FailureKind::kCut ? "Cut" : "Aging"; }

struct Localization {
  int span = 0;
  FailureKind kind = FailureKind::kCut;

  bool operator==(const Localization&) const = default;
};

// `ACTION: report_failure span=<id> kind=<Cut|Aging>` or `span=none`.
inline Localization parse_localization(const Action& a) {
  if (a.name != "report_failure") throw MalformedAction("expected report_failure, got " + a.name);
  const auto kv = parse_kv(a.args);
  const auto span = kv.find("span");
  if (span == kv.end()) throw MalformedAction("report_failure needs span=");
  if (span->second == "none") throw LocalizationFailed("backend found no anomaly in the evidence");
  Localization loc;
  loc.span = parse_int(span->second);
  if (loc.span < 0 || loc.span >= static_cast<int>(kSpanCount))
    throw MalformedAction("span id " + span->second + " out of range");
  const auto kind = kv.find("kind");
  if (kind == kv.end()) throw MalformedAction("report_failure needs kind=");
  if (kind->second == "Cut") loc.kind = FailureKind::kCut;
  else if (kind->second == "Aging") loc.kind = FailureKind::kAging;
  else throw MalformedAction("unknown failure kind '" + kind->second + "'");
  return loc;
}

// Least-squares line through (x, y), evaluated at the last x. Tracks a
// loss that is still ramping without the lag of a plain mean.
inline double trend_endpoint(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return my + slope * (x.back() - mx);
}

// Measured span loss (upstream amplifier output minus downstream amplifier
// input) above the datasheet value, at the newest of the last `n` records.
inline std::array<double, kSpanCount> measured_excess_db(std::span<const telemetry::TelemetryRecord> recs,
                                                         const std::array<double, kSpanCount>& datasheet_loss_db,
                                                         std::size_t n = 30) {
  n = std::min(n, recs.size());
  if (n == 0) throw InsufficientData("no telemetry for span loss");
  std::array<double, kSpanCount> out{};
  std::vector<double> x, y;
  for (std::size_t s = 0; s < kSpanCount; ++s) {
    x.clear();
    y.clear();
    for (std::size_t i = recs.size() - n; i < recs.size(); ++i) {
      x.push_back(recs[i].tick);
      y.push_back(recs[i].amp_out_dbm[s] - recs[i].amp_in_dbm[s + 1]);
    }
    out[s] = trend_endpoint(x, y) - datasheet_loss_db[s];
  }
  return out;
}

// Why a localization contradicts the telemetry, or nullopt if it does not.
// A cut needs a loss-of-signal signature on that span: its supervisory
// channel dark, or an LOS alarm naming it. Aging needs the span lit.
inline std::optional<std::string> contradiction(const Localization& loc, const telemetry::TelemetryRecord& latest,
                                                const std::vector<int>& los_spans) {
  const bool dark = !latest.osc_alive[static_cast<std::size_t>(loc.span)];
  const bool los = std::find(los_spans.begin(), los_spans.end(), loc.span) != los_spans.end();
  if (loc.kind == FailureKind::kCut && !dark && !los)
    return "span " + std::to_string(loc.span) + " shows no loss of signal, so it cannot be cut";
  if (loc.kind == FailureKind::kAging && dark)
    return "span " + std::to_string(loc.span) + " is dark, which is a cut rather than aging";
  return std::nullopt;
}

// Steps spliced in after generate_recovery. Cut: nothing may change on a
// dark line, so wait for the splice, then recalibrate. Aging: the amplifier
// after the span makes up the excess loss, capped at its maximum gain.
inline std::vector<PlanStep> generate_recovery(const Localization& loc, const GainConfig& config,
                                               double excess_db) {
  if (loc.kind == FailureKind::kCut)
    return {{"wait_for_repair", {{"span", std::to_string(loc.span)}}, "no gain changes while the span is dark"},
            {"probe_gains", {}, "excite the amplifiers around the repaired span"},
            {"fit_twin", {}, "recalibrate on post-repair telemetry"}};
  const std::size_t amp = static_cast<std::size_t>(loc.span) + 1;
  const double gain = std::min(kMaxGainDb, config.gains_db[amp] + std::max(0.0, excess_db));
  return {{"set_gain", {{"amp", std::to_string(amp)}, {"gain", format_double(gain)}},
           "compensate " + format_double(std::round(excess_db * 100) / 100) + " dB excess loss on span " +
               std::to_string(loc.span)},
          {"probe_gains", {}, "excite the amplifiers at the new operating point"},
          {"fit_twin", {}, "recalibrate with the aged span"}};
}

}  // namespace adon::agent

#endif  // ADON_AGENT_FAILURE_HPP_
