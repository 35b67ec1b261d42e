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

#ifndef ADON_AGENT_PLAN_HPP_
#define ADON_AGENT_PLAN_HPP_

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adon/agent/backend.hpp"
#include "adon/agent/grammar.hpp"
#include "adon/agent/transcript.hpp"
#include "adon/core/error.hpp"

namespace adon::agent {

inline constexpr std::size_t kMaxPlanSteps = 50;

class PlanRejected : public Error {
 public:
  PlanRejected(const std::string& what, std::string raw) : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

class ExecutionAborted : public Error {
 public:
  ExecutionAborted(const std::string& what, Transcript partial) : Error(what), partial_(std::move(partial)) {}
  const Transcript& partial() const { return partial_; }

 private:
  Transcript partial_;
};

struct PlanStep {
  std::string tool;
  std::map<std::string, std::string> args;
  std::string rationale;

  std::string action_line() const {
    std::string s = "ACTION: " + tool;
    for (const auto& [k, v] : args)
      s += " " + k + "=" + (v.find(' ') == std::string::npos && !v.empty() ? v : "\"" + v + "\"");
    return s;
  }

  nlohmann::json args_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : args) j[k] = v;
    return j;
  }

  bool operator==(const PlanStep&) const = default;
};

struct Plan {
  std::vector<PlanStep> steps;
  std::string source;  // "workflow:<name>" or "backend"
  std::string raw;     // backend text, verbatim
};

struct ToolResult {
  std::string text;
  nlohmann::json payload = nlohmann::json::object();
  std::vector<PlanStep> follow_up;  // spliced in right after the step
};

struct ToolSpec {
  std::string name;
  std::vector<std::string> required;
  std::vector<std::string> optional;
  std::function<ToolResult(const PlanStep&)> run;
};

class ToolRegistry {
 public:
  void add(ToolSpec spec) {
    const auto name = spec.name;
    tools_[name] = std::move(spec);
  }

  bool contains(const std::string& name) const { return tools_.count(name) != 0; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [n, t] : tools_) out.push_back(n);
    return out;
  }

  void validate(const PlanStep& step) const {
    const auto it = tools_.find(step.tool);
    if (it == tools_.end()) throw ValidationError("unknown tool '" + step.tool + "'");
    const auto& spec = it->second;
    for (const auto& r : spec.required)
      if (!step.args.count(r)) throw ValidationError(step.tool + " needs argument '" + r + "'");
    for (const auto& [k, v] : step.args) {
      const bool known = std::find(spec.required.begin(), spec.required.end(), k) != spec.required.end() ||
                         std::find(spec.optional.begin(), spec.optional.end(), k) != spec.optional.end();
      if (!known) throw ValidationError(step.tool + " has no argument '" + k + "'");
    }
  }

  ToolResult run(const PlanStep& step) const {
    validate(step);
    return tools_.at(step.tool).run(step);
  }

 private:
  std::map<std::string, ToolSpec> tools_;
};

inline PlanStep step_from_action(const Action& a) {
  return {a.name, parse_kv(a.args), a.thought};
}

// Parses and validates backend text as a whole plan.
inline Plan plan_from_text(const std::string& raw, const ToolRegistry& tools) {
  Plan plan;
  plan.source = "backend";
  plan.raw = raw;
  for (const auto& a : parse_actions(raw)) {
    plan.steps.push_back(step_from_action(a));
    tools.validate(plan.steps.back());
  }
  if (plan.steps.size() > kMaxPlanSteps)
    throw ValidationError("plan has " + std::to_string(plan.steps.size()) + " steps, limit is 50");
  return plan;
}

// Asks the backend for a plan; one re-prompt carrying the rejection reason.
inline Plan request_plan(const std::function<std::string(const Prompt&)>& complete, Prompt prompt,
                         const ToolRegistry& tools) {
  prompt.allowed_actions = tools.names();
  std::string raw;
  std::string reason;
  for (int attempt = 0; attempt < 2; ++attempt) {
    raw = complete(prompt);
    try {
      return plan_from_text(raw, tools);
    } catch (const Error& e) {
      reason = e.what();
      prompt.payload["rejected"] = reason;
    }
  }
  throw PlanRejected("plan rejected twice: " + reason, raw);
}

// Pre-defined workflows. Argument values of the form $name are bound at
// fetch time.
class WorkflowStore {
 public:
  static WorkflowStore defaults() {
    WorkflowStore s;
    s.add("add_drop", {{"set_load", {{"target", "$target"}}, "apply the requested channel load"},
                       {"probe_gains", {}, "excite the amplifiers so the twin can separate loss from noise"},
                       {"fit_twin", {}, "calibrate the twin on recent telemetry"},
                       {"optimize_power", {}, "coordinate ascent on the calibrated twin"},
                       {"sync_twin", {}, "track the line after the change"}});
    return s;
  }

  void add(const std::string& name, std::vector<PlanStep> steps) { workflows_[name] = std::move(steps); }

  Plan fetch(const std::string& name, const std::map<std::string, std::string>& bindings) {
    const auto it = workflows_.find(name);
    if (it == workflows_.end()) throw PlanRejected("no stored workflow '" + name + "'", "");
    ++fetches_;
    Plan plan;
    plan.source = "workflow:" + name;
    plan.steps = it->second;
    for (auto& step : plan.steps)
      for (auto& [k, v] : step.args)
        if (!v.empty() && v[0] == '$') {
          const auto b = bindings.find(v.substr(1));
          if (b == bindings.end()) throw ValidationError("workflow " + name + " needs binding " + v);
          v = b->second;
        }
    return plan;
  }

  std::size_t fetch_count() const { return fetches_; }

 private:
  std::map<std::string, std::vector<PlanStep>> workflows_;
  std::size_t fetches_ = 0;
};

// Short error class name used in repair prompts.
inline std::string error_type(const std::exception& e) {
  if (dynamic_cast<const CutLinkError*>(&e)) return "CutLink";
  if (dynamic_cast<const InsufficientData*>(&e)) return "InsufficientData";
  if (dynamic_cast<const NoActiveChannels*>(&e)) return "NoActiveChannels";
  if (dynamic_cast<const ValidationError*>(&e)) return "Validation";
  if (dynamic_cast<const Error*>(&e)) return "Error";
  return "Internal";
}

struct ExecutionContext {
  std::function<int()> now = [] { return 0; };
  // Proposes a step to run before retrying the failed one; nullopt aborts.
  std::function<std::optional<PlanStep>(const PlanStep& failed, const std::exception& error)> repair;
  int max_repairs = 2;
};

// Runs steps in order. Follow-up steps returned by a tool run next and
// inherit its phase number (the 1-based index of the top-level step).
inline void execute_plan(const Plan& plan, const ToolRegistry& tools, Transcript& t, const ExecutionContext& ctx) {
  std::deque<std::pair<PlanStep, int>> queue;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) queue.emplace_back(plan.steps[i], static_cast<int>(i + 1));
  int repairs = 0;
  while (!queue.empty()) {
    auto [step, phase] = queue.front();
    queue.pop_front();
    if (!step.rationale.empty()) t.thought(ctx.now(), phase, step.rationale);
    t.action(ctx.now(), phase, step.action_line().substr(8), step.args_json());
    try {
      ToolResult r = tools.run(step);
      t.observation(ctx.now(), phase, r.text, r.payload);
      for (auto it = r.follow_up.rbegin(); it != r.follow_up.rend(); ++it) queue.emplace_front(*it, phase);
    } catch (const std::exception& e) {
      const std::string type = error_type(e);
      t.observation(ctx.now(), phase, "error " + type + ": " + e.what(), {{"error_type", type}});
      std::optional<PlanStep> fix;
      if (++repairs <= ctx.max_repairs && ctx.repair) {
        try {
          fix = ctx.repair(step, e);
          if (fix) tools.validate(*fix);
        } catch (const Error& re) {
          t.thought(ctx.now(), phase, std::string("repair rejected: ") + re.what());
          fix.reset();
        }
      }
      if (!fix) {
        t.outcome(ctx.now(), "aborted at " + step.tool + ": " + e.what(), false);
        throw ExecutionAborted("plan aborted at " + step.tool + ": " + e.what(), t);
      }
      queue.emplace_front(step, phase);
      queue.emplace_front(*fix, phase);
    }
  }
}

}  // namespace adon::agent

#endif  // ADON_AGENT_PLAN_HPP_
