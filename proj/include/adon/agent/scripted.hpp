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

#ifndef ADON_AGENT_SCRIPTED_HPP_
#define ADON_AGENT_SCRIPTED_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adon/agent/backend.hpp"
#include "adon/agent/failure.hpp"
#include "adon/agent/grammar.hpp"
#include "adon/agent/mode.hpp"
#include "adon/core/gain_config.hpp"
#include "adon/optimizer/search.hpp"

namespace adon::agent {

// Step schedule shared by react_optimize and the scripted policy.
inline nlohmann::json to_json(const opt::CoordinateAscentOptions& o) {
  return {{"step_db", o.step_db}, {"min_step_db", o.min_step_db}, {"max_sweeps", o.max_sweeps},
          {"include_tilts", o.include_tilts}, {"gain_min_db", o.gain_min_db},
          {"gain_max_db", o.gain_max_db}};
}

inline opt::CoordinateAscentOptions schedule_from_json(const nlohmann::json& j) {
  opt::CoordinateAscentOptions o;
  o.step_db = j.at("step_db").get<double>();
  o.min_step_db = j.at("min_step_db").get<double>();
  o.max_sweeps = j.at("max_sweeps").get<int>();
  o.include_tilts = j.at("include_tilts").get<bool>();
  o.gain_min_db = j.at("gain_min_db").get<double>();
  o.gain_max_db = j.at("gain_max_db").get<double>();
  return o;
}

namespace detail {

struct Proposal {
  GainConfig config;
};

// Re-runs coordinate ascent against the evaluation history. The first
// configuration the history has not evaluated yet is the next proposal;
// nullopt means the search has terminated.
inline std::optional<GainConfig> replay_coordinate_ascent(
    const std::vector<std::pair<GainConfig, double>>& history, const opt::CoordinateAscentOptions& o) {
  if (history.empty()) return std::nullopt;
  std::size_t next = 0;
  auto eval = [&](const GainConfig& c) {
    if (next == history.size()) throw Proposal{c};
    if (history[next].first != c) throw Proposal{c};
    return history[next++].second;
  };
  try {
    GainConfig x = history.front().first;
    double fx = eval(x);
    const std::size_t coords = o.include_tilts ? 2 * kAmplifierCount : kAmplifierCount;
    double step = o.step_db;
    for (int sweep = 0; sweep < o.max_sweeps && step >= o.min_step_db; ++sweep) {
      bool improved = false;
      for (std::size_t i = 0; i < coords; ++i) {
        const bool tilt = i >= kAmplifierCount;
        const double lo = tilt ? kMinTiltDb : o.gain_min_db;
        const double hi = tilt ? kMaxTiltDb : o.gain_max_db;
        for (double dir : {1.0, -1.0}) {
          bool moved = false;
          while (true) {
            GainConfig cand = x;
            opt::coordinate(cand, i) = std::clamp(opt::coordinate(x, i) + dir * step, lo, hi);
            if (opt::coordinate(cand, i) == opt::coordinate(x, i)) break;
            const double fc = eval(cand);
            if (!(fc > fx)) break;
            x = cand;
            fx = fc;
            moved = improved = true;
          }
          if (moved) break;
        }
      }
      if (!improved) step /= 2.0;
    }
  } catch (const Proposal& p) {
    return p.config;
  }
  return std::nullopt;
}

inline std::optional<double> find_number(const std::string& text, const std::regex& re) {
  std::smatch m;
  if (std::regex_search(text, m, re)) return std::stod(m[1].str());
  return std::nullopt;
}

}  // namespace detail

// Deterministic stand-in for a language model. It reads only the prompt
// payload, so it exercises the same contract a remote model would.
class ScriptedPolicy : public LlmBackend {
 public:
  // Threshold on measured span loss above the datasheet value, dB.
  static constexpr double kAgingThresholdDb = 2.0;

  std::string name() const override { return "scripted"; }

  std::string complete(const Prompt& p) override {
    if (p.task == "select_mode") return select_mode(p.payload);
    if (p.task == "plan") return plan(p.payload);
    if (p.task == "localize") return localize(p.payload);
    if (p.task == "react") return react(p.payload);
    if (p.task == "repair") return repair(p.payload);
    return "THOUGHT: unsupported task " + p.task + "\nACTION: abort";
  }

 private:
  static std::string select_mode(const nlohmann::json& j) {
    const auto kind = j.at("event_kind").get<std::string>();
    const auto allowed = j.at("allowed").get<std::vector<std::string>>();
    const std::string want = is_service_kind(kind) ? "RuleCentric" : "LlmCentric";
    const std::string pick =
        std::find(allowed.begin(), allowed.end(), want) != allowed.end() ? want : allowed.front();
    return "THOUGHT: " + kind + " maps to " + pick + "\nACTION: select_mode mode=" + pick + "\n";
  }

  static std::string plan(const nlohmann::json& j) {
    const auto workflow = j.at("workflow").get<std::string>();
    if (workflow == "add_drop") {
      return "THOUGHT: apply the new load, then tune the gains directly on the line\n"
             "ACTION: set_load target=" + std::to_string(j.at("target_load").get<int>()) + "\n"
             "ACTION: react_optimize max_iters=" + std::to_string(j.value("max_iters", 20)) + "\n";
    }
    const auto alarm = j.at("alarm").value("kind", "");
    const std::string query = alarm == "DegradationForecast"
                                  ? "fiber attenuation datasheet span loss aging"
                                  : "loss of signal fiber cut repair span";
    return "THOUGHT: read the playbook and datasheets for this alarm\n"
           "ACTION: retrieve_docs query=\"" + query + "\"\n"
           "THOUGHT: find the failed span from powers, supervisory channels and logs\n"
           "ACTION: localize_failure\n"
           "THOUGHT: derive a recovery for the located failure\n"
           "ACTION: generate_recovery\n"
           "THOUGHT: re-optimize the gains on the calibrated model\n"
           "ACTION: optimize_power\n"
           "THOUGHT: keep the twin aligned with the line\n"
           "ACTION: sync_twin\n";
  }

  static std::string localize(const nlohmann::json& j) {
    const auto& telemetry = j.at("telemetry");
    if (telemetry.empty()) return "THOUGHT: no telemetry to inspect\nACTION: report_failure span=none\n";
    const auto& latest = telemetry.back();
    for (std::size_t s = 0; s < kSpanCount; ++s) {
      if (!latest.at("osc_alive")[s].get<bool>())
        return "THOUGHT: the supervisory channel of span " + std::to_string(s) +
               " is dark\nACTION: report_failure span=" + std::to_string(s) + " kind=Cut\n";
    }

    // Datasheet attenuation from the retrieved text when present, else the
    // nominal value in the device tree.
    static const std::regex kAlpha(R"(Attenuation coefficient:\s*([0-9.]+)\s*dB/km)");
    std::optional<double> alpha;
    for (const auto& c : j.at("chunks"))
      if (!alpha) alpha = detail::find_number(c.at("text").get<std::string>(), kAlpha);

    std::array<double, kSpanCount> excess{};
    const std::size_t n = std::min<std::size_t>(30, telemetry.size());
    std::vector<double> x, y;
    for (std::size_t s = 0; s < kSpanCount; ++s) {
      const auto& span = j.at("spans")[s];
      const double a = alpha.value_or(span.at("attenuation_db_per_km").get<double>());
      x.clear();
      y.clear();
      for (std::size_t i = telemetry.size() - n; i < telemetry.size(); ++i) {
        x.push_back(telemetry[i].at("tick").get<double>());
        y.push_back(telemetry[i].at("amp_out_dbm")[s].get<double>() - telemetry[i].at("amp_in_dbm")[s + 1].get<double>());
      }
      excess[s] = trend_endpoint(x, y) - a * span.at("length_km").get<double>();
    }
    const auto worst = static_cast<std::size_t>(std::max_element(excess.begin(), excess.end()) - excess.begin());
    std::string thought = "THOUGHT: span loss above datasheet:";
    for (std::size_t s = 0; s < kSpanCount; ++s) thought += " " + format_double(std::round(excess[s] * 100) / 100);
    if (excess[worst] <= kAgingThresholdDb) return thought + "\nACTION: report_failure span=none\n";
    return thought + "\nACTION: report_failure span=" + std::to_string(worst) + " kind=Aging\n";
  }

  static std::string react(const nlohmann::json& j) {
    std::vector<std::pair<GainConfig, double>> history;
    for (const auto& h : j.at("history")) {
      GainConfig c;
      c.gains_db = h.at("gains_db").get<std::array<double, kAmplifierCount>>();
      c.tilts_db = h.at("tilts_db").get<std::array<double, kAmplifierCount>>();
      history.emplace_back(c, h.at("value").get<double>());
    }
    const auto next = detail::replay_coordinate_ascent(history, schedule_from_json(j.at("schedule")));
    if (!next) return "THOUGHT: no coordinate move improves min-Q at the smallest step\nACTION: finish\n";
    return "THOUGHT: probe the next coordinate move\nACTION: set_gains " + format_six(next->gains_db) +
           " tilts=" + format_six(next->tilts_db) + "\n";
  }

  static std::string repair(const nlohmann::json& j) {
    if (j.value("error_type", "") == "CutLink" && j.contains("dark_span"))
      return "THOUGHT: the line is dark; optimization must wait for the splice\n"
             "ACTION: wait_for_repair span=" + std::to_string(j.at("dark_span").get<int>()) + "\n";
    return "THOUGHT: no safe repair for this error\nACTION: abort\n";
  }
};

}  // namespace adon::agent

#endif  // ADON_AGENT_SCRIPTED_HPP_
