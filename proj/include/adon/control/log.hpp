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

#ifndef ADON_CONTROL_LOG_HPP_
#define ADON_CONTROL_LOG_HPP_

#include <algorithm>
#include <cstdint>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adon/core/error.hpp"

namespace adon::control {

enum class Severity { kDebug, kInfo, kWarning, kError };

inline const char* to_string(Severity s) {
  switch (s) {
    case Severity::kDebug: return "debug";
    case Severity::kInfo: return "info";
    case Severity::kWarning: return "warning";
    case Severity::kError: return "error";
  }
  return "?";
}

inline Severity severity_from_string(const std::string& s) {
  for (Severity v : {Severity::kDebug, Severity::kInfo, Severity::kWarning, Severity::kError})
    if (s == to_string(v)) return v;
  throw ValidationError("unknown severity '" + s + "'");
}

struct LogEntry {
  int tick = 0;
  std::uint64_t seq = 0;
  Severity severity = Severity::kInfo;
  std::string source;
  std::string text;
  nlohmann::json payload = nlohmann::json::object();

  bool operator==(const LogEntry&) const = default;
};

inline nlohmann::json to_json(const LogEntry& e) {
  return {{"tick", e.tick},
          {"seq", e.seq},
          {"severity", to_string(e.severity)},
          {"source", e.source},
          {"text", e.text},
          {"payload", e.payload}};
}

inline LogEntry log_entry_from_json(const nlohmann::json& j) {
  LogEntry e;
  e.tick = j.at("tick").get<int>();
  e.seq = j.at("seq").get<std::uint64_t>();
  e.severity = severity_from_string(j.at("severity").get<std::string>());
  e.source = j.at("source").get<std::string>();
  e.text = j.at("text").get<std::string>();
  e.payload = j.value("payload", nlohmann::json::object());
  return e;
}

// Append-only operation log ordered by (tick, seq). Entries stamped with an
// older tick than the last one are moved up to the last tick, so ordering
// never depends on the caller.
class LogStore {
 public:
  const LogEntry& append(int tick, Severity sev, std::string source, std::string text,
                         nlohmann::json payload = nlohmann::json::object()) {
    std::lock_guard lock(mu_);
    LogEntry e;
    e.tick = entries_.empty() ? tick : std::max(tick, entries_.back().tick);
    e.seq = next_seq_++;
    e.severity = sev;
    e.source = std::move(source);
    e.text = std::move(text);
    e.payload = std::move(payload);
    entries_.push_back(std::move(e));
    return entries_.back();
  }

  // Entries with from_tick <= tick <= to_tick.
  std::vector<LogEntry> range(int from_tick, int to_tick) const {
    std::lock_guard lock(mu_);
    std::vector<LogEntry> out;
    if (from_tick > to_tick) return out;
    auto lo = std::lower_bound(entries_.begin(), entries_.end(), from_tick,
                               [](const LogEntry& e, int t) { return e.tick < t; });
    for (auto it = lo; it != entries_.end() && it->tick <= to_tick; ++it) out.push_back(*it);
    return out;
  }

  std::vector<LogEntry> all() const {
    std::lock_guard lock(mu_);
    return entries_;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }

  void write_jsonl(std::ostream& os) const {
    for (const auto& e : all()) os << to_json(e).dump() << '\n';
  }

 private:
  mutable std::mutex mu_;
  std::vector<LogEntry> entries_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace adon::control

#endif  // ADON_CONTROL_LOG_HPP_
