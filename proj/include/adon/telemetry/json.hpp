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

#ifndef ADON_TELEMETRY_JSON_HPP_
#define ADON_TELEMETRY_JSON_HPP_

#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "adon/core/error.hpp"
#include "adon/telemetry/record.hpp"

namespace adon::telemetry {

namespace detail {

inline std::string to_bits(const std::vector<bool>& v) {
  std::string s;
  for (bool b : v) s += b ? '1' : '0';
  return s;
}

inline std::vector<bool> from_bits(const std::string& s) {
  std::vector<bool> v;
  for (char c : s) {
    if (c != '0' && c != '1') throw ValidationError("occupancy must be a 0/1 string");
    v.push_back(c == '1');
  }
  return v;
}

inline nlohmann::json optional_array(const std::vector<std::optional<double>>& v) {
  auto a = nlohmann::json::array();
  for (const auto& x : v) a.push_back(x ? nlohmann::json(*x) : nlohmann::json(nullptr));
  return a;
}

}  // namespace detail

inline nlohmann::json to_json(const TelemetryRecord& r) {
  return {{"tick", r.tick},
          {"epoch", r.epoch},
          {"gains_db", r.config.gains_db},
          {"tilts_db", r.config.tilts_db},
          {"active", detail::to_bits(r.active)},
          {"real", detail::to_bits(r.real)},
          {"amp_in_dbm", r.amp_in_dbm},
          {"amp_out_dbm", r.amp_out_dbm},
          {"osc_alive", r.osc_alive},
          {"rx_dbm", detail::optional_array(r.rx_dbm)},
          {"q_db", detail::optional_array(r.q_db)}};
}

inline TelemetryRecord record_from_json(const nlohmann::json& j) {
  TelemetryRecord r;
  r.tick = j.at("tick").get<int>();
  r.epoch = j.at("epoch").get<std::uint64_t>();
  r.config.gains_db = j.at("gains_db").get<std::array<double, kAmplifierCount>>();
  r.config.tilts_db = j.at("tilts_db").get<std::array<double, kAmplifierCount>>();
  r.active = detail::from_bits(j.at("active").get<std::string>());
  r.real = detail::from_bits(j.at("real").get<std::string>());
  r.amp_in_dbm = j.at("amp_in_dbm").get<std::array<double, kAmplifierCount>>();
  r.amp_out_dbm = j.at("amp_out_dbm").get<std::array<double, kAmplifierCount>>();
  r.osc_alive = j.at("osc_alive").get<std::array<bool, kSpanCount>>();
  for (const char* key : {"rx_dbm", "q_db"}) {
    auto& dst = std::string(key) == "rx_dbm" ? r.rx_dbm : r.q_db;
    for (const auto& x : j.at(key)) dst.push_back(x.is_null() ? std::nullopt : std::optional<double>(x.get<double>()));
  }
  return r;
}

// Projection used by telemetry subscriptions. An empty amplifier set keeps
// the whole record; otherwise only the tick and those amplifiers' ports.
struct TelemetryFilter {
  std::set<std::size_t> amplifiers;

  nlohmann::json apply(const TelemetryRecord& r) const {
    if (amplifiers.empty()) return to_json(r);
    nlohmann::json j = {{"tick", r.tick}};
    for (std::size_t k : amplifiers) {
      j["amp_" + std::to_string(k)] = {{"in_dbm", r.amp_in_dbm[k]}, {"out_dbm", r.amp_out_dbm[k]}};
    }
    return j;
  }

  static TelemetryFilter from_json(const nlohmann::json& j) {
    TelemetryFilter f;
    if (j.is_object() && j.contains("amplifiers")) {
      for (const auto& k : j.at("amplifiers")) {
        const auto id = k.get<long long>();
        if (id < 0 || id >= static_cast<long long>(kAmplifierCount))
          throw ValidationError("amplifier id out of range: " + std::to_string(id));
        f.amplifiers.insert(static_cast<std::size_t>(id));
      }
    }
    return f;
  }
};

}  // namespace adon::telemetry

#endif  // ADON_TELEMETRY_JSON_HPP_
