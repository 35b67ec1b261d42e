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

#ifndef ADON_AGENT_MODE_HPP_
#define ADON_AGENT_MODE_HPP_

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adon/core/error.hpp"

namespace adon::agent {

enum class OperationMode { kLlmNative, kLlmCentric, kRuleCentric };

inline const char* to_string(OperationMode m) {
  switch (m) {
    case OperationMode::kLlmNative: return "LlmNative";
    case OperationMode::kLlmCentric: return "LlmCentric";
    case OperationMode::kRuleCentric: return "RuleCentric";
  }
  return "?";
}

inline OperationMode mode_from_string(const std::string& s) {
  for (auto m : {OperationMode::kLlmNative, OperationMode::kLlmCentric, OperationMode::kRuleCentric})
    if (s == to_string(m)) return m;
  throw ValidationError("unknown operation mode '" + s + "'");
}

class UnknownEventKind : public Error {
 public:
  using Error::Error;
};

inline bool is_service_kind(const std::string& kind) {
  return kind == "SetLoad" || kind == "EstablishBatches";
}

inline bool is_failure_kind(const std::string& kind) {
  return kind == "QDrop" || kind == "LossOfSignal" || kind == "DegradationForecast";
}

// Modes a task kind may run in. Failure handling has no stored workflow, so
// it needs a backend.
inline std::vector<OperationMode> allowed_modes(const std::string& kind) {
  if (is_service_kind(kind))
    return {OperationMode::kRuleCentric, OperationMode::kLlmNative, OperationMode::kLlmCentric};
  if (is_failure_kind(kind)) return {OperationMode::kLlmCentric, OperationMode::kLlmNative};
  throw UnknownEventKind("no operation mode for event kind '" + kind + "'");
}

class ModeTable {
 public:
  static ModeTable defaults() {
    ModeTable t;
    t.modes_ = {{"SetLoad", OperationMode::kRuleCentric},
                {"EstablishBatches", OperationMode::kRuleCentric},
                {"QDrop", OperationMode::kLlmCentric},
                {"LossOfSignal", OperationMode::kLlmCentric},
                {"DegradationForecast", OperationMode::kLlmCentric}};
    return t;
  }

  // Overrides on top of the defaults, e.g. {"SetLoad": "LlmNative"}.
  static ModeTable from_json(const nlohmann::json& j) {
    ModeTable t = defaults();
    if (!j.is_object()) throw ValidationError("mode table must be a JSON object");
    for (const auto& [kind, mode] : j.items()) t.set(kind, mode_from_string(mode.get<std::string>()));
    return t;
  }

  static ModeTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open mode table " + path);
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("mode table " + path + ": " + e.what());
    }
  }

  void set(const std::string& kind, OperationMode mode) {
    const auto allowed = allowed_modes(kind);
    if (std::find(allowed.begin(), allowed.end(), mode) == allowed.end())
      throw ValidationError(std::string(to_string(mode)) + " is not allowed for " + kind);
    modes_[kind] = mode;
  }

  OperationMode lookup(const std::string& kind) const {
    const auto it = modes_.find(kind);
    if (it == modes_.end()) throw UnknownEventKind("no operation mode for event kind '" + kind + "'");
    return it->second;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, m] : modes_) j[k] = to_string(m);
    return j;
  }

 private:
  std::map<std::string, OperationMode> modes_;
};

}  // namespace adon::agent

#endif  // ADON_AGENT_MODE_HPP_
