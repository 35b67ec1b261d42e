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

#ifndef ADON_AGENT_BACKEND_HPP_
#define ADON_AGENT_BACKEND_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace adon::agent {

// What the agent hands a backend. `context` is the rendered text a language
// model reads; `payload` carries the same facts in structured form.
struct Prompt {
  std::string task;  // "select_mode", "plan", "localize", "react", "repair"
  std::string context;
  nlohmann::json payload = nlohmann::json::object();
  std::vector<std::string> allowed_actions;
};

// Turns a prompt into action text. The reply is always parsed by the
// grammar in grammar.hpp; nothing a backend says is trusted as structure.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string complete(const Prompt& prompt) = 0;
  virtual std::string name() const = 0;
};

// Canonical text rendering of a prompt, shared by remote backends.
inline std::string render_prompt(const Prompt& p) {
  std::string s = "TASK: " + p.task + "\n";
  s += "ALLOWED ACTIONS:";
  for (const auto& a : p.allowed_actions) s += " " + a;
  s += "\nReply with lines of the form 'THOUGHT: <text>' and 'ACTION: <name> <args>'.\n";
  if (!p.context.empty()) s += "CONTEXT:\n" + p.context + "\n";
  s += "DATA:\n" + p.payload.dump() + "\n";
  return s;
}

}  // namespace adon::agent

#endif  // ADON_AGENT_BACKEND_HPP_
