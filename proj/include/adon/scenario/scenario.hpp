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

#ifndef ADON_SCENARIO_SCENARIO_HPP_
#define ADON_SCENARIO_SCENARIO_HPP_

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "adon/core/error.hpp"
#include "adon/core/gain_config.hpp"

namespace adon::scenario {

enum class EventKind { kEstablishBatches, kSetLoad, kFiberCut, kAgingRamp, kRepairCut };

inline constexpr int kBatchSize = 5;
inline constexpr int kMaxLoad = 30;

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::kEstablishBatches: return "establish";
    case EventKind::kSetLoad: return "load";
    case EventKind::kFiberCut: return "cut";
    case EventKind::kAgingRamp: return "aging";
    case EventKind::kRepairCut: return "repair";
  }
  return "?";
}

// Canonical event-kind names used by mode tables and alarms.
inline const char* kind_name(EventKind k) {
  switch (k) {
    case EventKind::kEstablishBatches: return "EstablishBatches";
    case EventKind::kSetLoad: return "SetLoad";
    case EventKind::kFiberCut: return "FiberCut";
    case EventKind::kAgingRamp: return "AgingRamp";
    case EventKind::kRepairCut: return "RepairCut";
  }
  return "?";
}

struct Event {
  int at_tick = 0;
  EventKind kind = EventKind::kSetLoad;
  int value = 0;       // batches, target load, or span id
  double rate_db = 0;  // aging only, dB per tick
  double cap_db = 0;   // aging only

  bool is_service() const {
    return kind == EventKind::kEstablishBatches || kind == EventKind::kSetLoad;
  }
  int target_load() const {
    return kind == EventKind::kEstablishBatches ? value * kBatchSize : value;
  }
  int span() const { return value; }

  void validate() const {
    if (at_tick < 0) throw ValidationError("event tick must be non-negative");
    switch (kind) {
      case EventKind::kEstablishBatches:
        if (value < 0 || value * kBatchSize > kMaxLoad)
          throw ValidationError("establish needs 0..6 batches");
        break;
      case EventKind::kSetLoad:
        if (value < 0 || value > kMaxLoad || value % kBatchSize != 0)
          throw ValidationError("load " + std::to_string(value) +
                                " is not a multiple of 5 in [0, 30]");
        break;
      case EventKind::kFiberCut:
      case EventKind::kRepairCut:
      case EventKind::kAgingRamp:
        if (value < 0 || value >= static_cast<int>(kSpanCount))
          throw ValidationError("span id " + std::to_string(value) + " out of range");
        if (kind == EventKind::kAgingRamp && !(rate_db > 0.0))
          throw ValidationError("aging rate must be positive");
        if (kind == EventKind::kAgingRamp && !(cap_db > 0.0))
          throw ValidationError("aging cap must be positive");
        break;
    }
  }

  std::string to_line() const {
    std::string s = std::to_string(at_tick) + " " + to_string(kind) + " " + std::to_string(value);
    if (kind == EventKind::kAgingRamp) s += " " + format_double(rate_db) + " " + format_double(cap_db);
    return s;
  }

  bool operator==(const Event&) const = default;
};

inline nlohmann::json to_json(const Event& e) {
  nlohmann::json j;
  j["tick"] = e.at_tick;
  j["kind"] = kind_name(e.kind);
  switch (e.kind) {
    case EventKind::kEstablishBatches: j["batches"] = e.value; break;
    case EventKind::kSetLoad: j["target"] = e.value; break;
    case EventKind::kAgingRamp:
      j["span"] = e.value;
      j["rate_db"] = e.rate_db;
      j["cap_db"] = e.cap_db;
      break;
    default: j["span"] = e.value; break;
  }
  return j;
}

inline Event event_from_json(const nlohmann::json& j) {
  Event e;
  const std::string kind = j.at("kind").get<std::string>();
  e.at_tick = j.value("tick", 0);
  if (kind == "EstablishBatches") {
    e.kind = EventKind::kEstablishBatches;
    e.value = j.at("batches").get<int>();
  } else if (kind == "SetLoad") {
    e.kind = EventKind::kSetLoad;
    e.value = j.at("target").get<int>();
  } else if (kind == "FiberCut") {
    e.kind = EventKind::kFiberCut;
    e.value = j.at("span").get<int>();
  } else if (kind == "RepairCut") {
    e.kind = EventKind::kRepairCut;
    e.value = j.at("span").get<int>();
  } else if (kind == "AgingRamp") {
    e.kind = EventKind::kAgingRamp;
    e.value = j.at("span").get<int>();
    e.rate_db = j.at("rate_db").get<double>();
    e.cap_db = j.at("cap_db").get<double>();
  } else {
    throw ValidationError("unknown event kind '" + kind + "'");
  }
  e.validate();
  return e;
}

struct Scenario {
  std::string name = "unnamed";
  std::vector<Event> events;  // sorted by at_tick
  std::uint64_t seed = 7;
  double tick_length_ms = 1.0;
  int tail_ticks = 300;  // run length past the last event

  int duration_ticks() const {
    return events.empty() ? tail_ticks : events.back().at_tick + tail_ticks;
  }
};

namespace detail {

inline std::vector<std::pair<std::string_view, std::size_t>> split_ws(std::string_view line) {
  std::vector<std::pair<std::string_view, std::size_t>> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start), start + 1);
  }
  return out;
}

template <class T>
T parse_token(std::pair<std::string_view, std::size_t> tok, std::size_t line, const char* what) {
  T v{};
  auto r = std::from_chars(tok.first.data(), tok.first.data() + tok.first.size(), v);
  if (r.ec != std::errc() || r.ptr != tok.first.data() + tok.first.size())
    throw ParseError(std::string("expected ") + what + ", got '" + std::string(tok.first) + "'",
                     line, tok.second);
  return v;
}

}  // namespace detail

// Line-oriented scenario text: "<tick> <kind> <args...>", '#' comments.
//   0    establish 4
//   300  cut 0
//   500  repair 0
//   800  load 30
//   1700 aging 2 0.06 2.4
inline Scenario load_scenario(std::string_view text, std::string name = "scenario") {
  Scenario sc;
  sc.name = std::move(name);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() < 3)
      throw ParseError("expected '<tick> <kind> <args...>'", line_no, toks[0].second);
    Event e;
    e.at_tick = detail::parse_token<int>(toks[0], line_no, "tick");
    const std::string_view kind = toks[1].first;
    std::size_t expected_args = 1;
    if (kind == "establish") e.kind = EventKind::kEstablishBatches;
    else if (kind == "load") e.kind = EventKind::kSetLoad;
    else if (kind == "cut") e.kind = EventKind::kFiberCut;
    else if (kind == "repair") e.kind = EventKind::kRepairCut;
    else if (kind == "aging") {
      e.kind = EventKind::kAgingRamp;
      expected_args = 3;
    } else {
      throw ParseError("unknown event kind '" + std::string(kind) + "'", line_no, toks[1].second);
    }
    if (toks.size() != 2 + expected_args)
      throw ParseError("'" + std::string(kind) + "' takes " + std::to_string(expected_args) +
                           " argument(s)",
                       line_no, toks[1].second);
    e.value = detail::parse_token<int>(toks[2], line_no, "integer");
    if (e.kind == EventKind::kAgingRamp) {
      e.rate_db = detail::parse_token<double>(toks[3], line_no, "rate");
      e.cap_db = detail::parse_token<double>(toks[4], line_no, "cap");
    }
    try {
      e.validate();
    } catch (const ValidationError& err) {
      throw ValidationError(std::string(err.what()) + " (line " + std::to_string(line_no) + ")");
    }
    sc.events.push_back(e);
  }
  std::stable_sort(sc.events.begin(), sc.events.end(),
                   [](const Event& a, const Event& b) { return a.at_tick < b.at_tick; });
  return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  auto slash = path.find_last_of('/');
  return load_scenario(ss.str(), slash == std::string::npos ? path : path.substr(slash + 1));
}

// The lifecycle exercised end to end: BoL with four batches, a fiber cut and
// its repair, add/drop to 30/25/15, a gradual aging ramp, then back to 30.
inline constexpr std::string_view kCanonicalScenarioText =
    "# canonical lifecycle\n"
    "0    establish 4\n"
    "300  cut 0\n"
    "500  repair 0\n"
    "800  load 30\n"
    "1100 load 25\n"
    "1400 load 15\n"
    "1700 aging 2 0.06 2.4\n"
    "2100 load 30\n";

inline Scenario canonical_scenario() { return load_scenario(kCanonicalScenarioText, "canonical"); }

// Named built-in presets ("canonical"), else a path to a scenario file.
inline Scenario resolve_scenario(const std::string& name_or_path) {
  if (name_or_path == "canonical") return canonical_scenario();
  return load_scenario_file(name_or_path);
}

}  // namespace adon::scenario

#endif  // ADON_SCENARIO_SCENARIO_HPP_
