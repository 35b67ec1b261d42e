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

#ifndef ADON_AGENT_TRANSCRIPT_HPP_
#define ADON_AGENT_TRANSCRIPT_HPP_

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adon/agent/mode.hpp"
#include "adon/core/error.hpp"

namespace adon::agent {

enum class EntryKind { kThought, kAction, kObservation, kOutcome };

inline const char* to_string(EntryKind k) {
  switch (k) {
    case EntryKind::kThought: return "thought";
    case EntryKind::kAction: return "action";
    case EntryKind::kObservation: return "observation";
    case EntryKind::kOutcome: return "outcome";
  }
  return "?";
}

inline EntryKind entry_kind_from_string(const std::string& s) {
  for (auto k : {EntryKind::kThought, EntryKind::kAction, EntryKind::kObservation, EntryKind::kOutcome})
    if (s == to_string(k)) return k;
  throw ValidationError("unknown transcript entry kind '" + s + "'");
}

struct TranscriptEntry {
  EntryKind kind = EntryKind::kThought;
  int tick = 0;
  int phase = 0;  // plan step number the entry belongs to; 0 outside a plan
  std::string text;
  nlohmann::json payload = nlohmann::json::object();
  std::string raw;  // verbatim backend text, when a backend produced the entry

  bool operator==(const TranscriptEntry&) const = default;
};

struct Transcript {
  std::string task_id;
  std::string task_kind;
  OperationMode mode = OperationMode::kRuleCentric;
  std::vector<TranscriptEntry> entries;

  void thought(int tick, int phase, std::string text, std::string raw = {}) {
    entries.push_back({EntryKind::kThought, tick, phase, std::move(text), nlohmann::json::object(), std::move(raw)});
  }
  void action(int tick, int phase, std::string text, nlohmann::json args, std::string raw = {}) {
    entries.push_back({EntryKind::kAction, tick, phase, std::move(text), std::move(args), std::move(raw)});
  }
  void observation(int tick, int phase, std::string text, nlohmann::json payload = nlohmann::json::object()) {
    entries.push_back({EntryKind::kObservation, tick, phase, std::move(text), std::move(payload), {}});
  }
  void outcome(int tick, std::string text, bool success) {
    entries.push_back({EntryKind::kOutcome, tick, 0, std::move(text), {{"success", success}}, {}});
  }

  std::size_t action_count() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.kind == EntryKind::kAction;
    return n;
  }

  // Every action is followed by exactly one observation before the next action.
  bool well_formed() const {
    bool open = false;
    for (const auto& e : entries) {
      if (e.kind == EntryKind::kAction) {
        if (open) return false;
        open = true;
      } else if (e.kind == EntryKind::kObservation) {
        if (!open) return false;
        open = false;
      }
    }
    return !open;
  }

  bool operator==(const Transcript&) const = default;
};

inline nlohmann::json to_json(const Transcript& t, const TranscriptEntry& e) {
  return {{"task", t.task_id}, {"task_kind", t.task_kind}, {"mode", to_string(t.mode)},
          {"kind", to_string(e.kind)}, {"tick", e.tick}, {"phase", e.phase},
          {"text", e.text}, {"payload", e.payload}, {"raw", e.raw}};
}

inline void write_jsonl(std::ostream& os, const Transcript& t) {
  for (const auto& e : t.entries) os << to_json(t, e).dump() << '\n';
}

// Consecutive lines sharing a task id form one transcript.
inline std::vector<Transcript> read_transcripts(std::istream& in) {
  std::vector<Transcript> out;
  std::string line;
  std::size_t offset = 0;
  while (true) {
    const std::size_t start = offset;
    if (!std::getline(in, line)) break;
    const bool terminated = !in.eof();
    offset += line.size() + (terminated ? 1 : 0);
    if (line.empty()) continue;
    if (!terminated) throw ParseError::at_offset("truncated transcript line", start);
    try {
      const auto j = nlohmann::json::parse(line);
      const auto task = j.at("task").get<std::string>();
      if (out.empty() || out.back().task_id != task) {
        out.emplace_back();
        out.back().task_id = task;
        out.back().task_kind = j.at("task_kind").get<std::string>();
        out.back().mode = mode_from_string(j.at("mode").get<std::string>());
      }
      out.back().entries.push_back({entry_kind_from_string(j.at("kind").get<std::string>()),
                                    j.at("tick").get<int>(), j.at("phase").get<int>(),
                                    j.at("text").get<std::string>(), j.at("payload"),
                                    j.at("raw").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError::at_offset(std::string("bad transcript line: ") + e.what(), start);
    } catch (const ValidationError& e) {
      throw ParseError::at_offset(std::string("bad transcript line: ") + e.what(), start);
    }
  }
  return out;
}

// Plain-text report: one block per task, actions numbered by plan phase.
inline std::string render_report(const std::vector<Transcript>& transcripts) {
  std::string s;
  for (const auto& t : transcripts) {
    s += "== " + t.task_id + " (" + t.task_kind + ", " + to_string(t.mode) + ")\n";
    for (const auto& e : t.entries) {
      const std::string tick = "[" + std::to_string(e.tick) + "] ";
      switch (e.kind) {
        case EntryKind::kThought: s += tick + "   thought: " + e.text + "\n"; break;
        case EntryKind::kAction:
          s += tick + "(" + std::to_string(e.phase) + ") " + e.text + "\n";
          break;
        case EntryKind::kObservation: s += tick + "    -> " + e.text + "\n"; break;
        case EntryKind::kOutcome: s += tick + "outcome: " + e.text + "\n"; break;
      }
    }
  }
  return s;
}

}  // namespace adon::agent

#endif  // ADON_AGENT_TRANSCRIPT_HPP_
