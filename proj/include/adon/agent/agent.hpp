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

#ifndef ADON_AGENT_AGENT_HPP_
#define ADON_AGENT_AGENT_HPP_

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adon/agent/backend.hpp"
#include "adon/agent/device.hpp"
#include "adon/agent/failure.hpp"
#include "adon/agent/grammar.hpp"
#include "adon/agent/mode.hpp"
#include "adon/agent/plan.hpp"
#include "adon/agent/react.hpp"
#include "adon/agent/retrieval.hpp"
#include "adon/agent/transcript.hpp"
#include "adon/optimizer/environment.hpp"
#include "adon/optimizer/search.hpp"
#include "adon/telemetry/json.hpp"
#include "adon/twin/twin.hpp"

namespace adon::agent {

// A unit of work for the planner: a deferred service request or an alarm.
struct Task {
  std::string id;
  std::string event_kind;  // SetLoad, EstablishBatches, QDrop, LossOfSignal, DegradationForecast
  int tick = 0;
  nlohmann::json detail = nlohmann::json::object();  // {"target_load"} or the alarm
};

struct AgentOptions {
  ModeTable modes = ModeTable::defaults();
  bool backend_selects_mode = false;
  opt::CoordinateAscentOptions optimize{0.5, 0.125, 10, false, kMinGainDb, kMaxGainDb};
  ReactOptions react;
  int probe_hold_ticks = 10;
  int fit_window_ticks = 600;
  int sync_ticks = 5;
  int repair_timeout_ticks = 5000;
  int evidence_ticks = 50;
  twin::FitOptions fit;
  twin::SyncOptions sync;
};

struct Incident {
  std::string task_id;
  std::string alarm_kind;
  int alarm_tick = 0;
  std::optional<Localization> localization;
  std::size_t actions_to_localize = 0;
  int localized_tick = -1;
  int done_tick = -1;
  bool success = false;
};

inline nlohmann::json to_json(const Incident& i) {
  nlohmann::json j = {{"task", i.task_id}, {"alarm", i.alarm_kind}, {"alarm_tick", i.alarm_tick},
                      {"actions_to_localize", i.actions_to_localize}, {"localized_tick", i.localized_tick},
                      {"done_tick", i.done_tick}, {"success", i.success}};
  j["span"] = i.localization ? nlohmann::json(i.localization->span) : nlohmann::json(nullptr);
  j["kind"] = i.localization ? nlohmann::json(to_string(i.localization->kind)) : nlohmann::json(nullptr);
  return j;
}

struct TaskResult {
  Transcript transcript;
  bool success = false;
  std::string error;
  std::optional<opt::OptimizerReport> optimization;  // last optimizer run of the task
};

// The planner: picks an operation mode per task, obtains a plan (stored
// workflow or backend), executes it against the device and keeps the twin.
class Agent {
 public:
  Agent(Device& device, physics::LinkTopology nominal, DocumentStore docs, LlmBackend* backend,
        AgentOptions opt = {})
      : device_(device), nominal_(std::move(nominal)), docs_(std::move(docs)), backend_(backend),
        opt_(std::move(opt)), workflows_(WorkflowStore::defaults()) {
    register_tools();
  }

  OperationMode select_mode(const std::string& kind) {
    const auto allowed = allowed_modes(kind);
    if (!opt_.backend_selects_mode || !backend_) return opt_.modes.lookup(kind);
    nlohmann::json names = nlohmann::json::array();
    for (auto m : allowed) names.push_back(to_string(m));
    const std::string raw = call_backend("selection", {"select_mode", "", {{"event_kind", kind}, {"allowed", names}},
                                                       {"select_mode"}});
    try {
      const auto a = parse_single_action(raw);
      const auto kv = parse_kv(a.args);
      if (a.name != "select_mode" || !kv.count("mode")) throw MalformedAction("expected select_mode mode=...");
      const auto mode = mode_from_string(kv.at("mode"));
      if (std::find(allowed.begin(), allowed.end(), mode) == allowed.end())
        throw ValidationError(kv.at("mode") + " not allowed for " + kind);
      return mode;
    } catch (const Error&) {
      return opt_.modes.lookup(kind);
    }
  }

  TaskResult handle(const Task& task) {
    TaskResult result;
    mode_ = select_mode(task.event_kind);
    task_ = &task;
    last_optimization_.reset();
    Transcript& t = result.transcript;
    t.task_id = task.id;
    t.task_kind = task.event_kind;
    t.mode = mode_;
    const bool failure = is_failure_kind(task.event_kind);
    if (failure) {
      Incident inc;
      inc.task_id = task.id;
      inc.alarm_kind = task.event_kind;
      inc.alarm_tick = task.tick;
      incidents_.push_back(inc);
      localization_.reset();
      chunks_.clear();
    }
    transcript_ = &t;
    try {
      Plan plan = make_plan(task);
      ExecutionContext ctx;
      ctx.now = [this] { return device_.tick(); };
      ctx.repair = [this](const PlanStep& failed, const std::exception& e) { return repair(failed, e); };
      execute_plan(plan, tools_, t, ctx);
      t.outcome(device_.tick(), "completed " + std::to_string(t.action_count()) + " actions", true);
      result.success = true;
    } catch (const ExecutionAborted& e) {
      t = e.partial();
      result.error = e.what();
    } catch (const Error& e) {
      t.outcome(device_.tick(), e.what(), false);
      result.error = e.what();
    }
    if (failure) {
      incidents_.back().done_tick = device_.tick();
      incidents_.back().success = result.success;
    }
    result.optimization = last_optimization_;
    transcript_ = nullptr;
    task_ = nullptr;
    return result;
  }

  // Per-tick hook: once calibrated, the twin follows every usable record.
  void observe(const telemetry::TelemetryRecord& r) {
    if (fitted_) twin_ = twin::sync(twin_, nominal_, r, opt_.sync);
  }

  const twin::TwinParameters& twin() const { return twin_; }
  bool twin_fitted() const { return fitted_; }
  const std::vector<Incident>& incidents() const { return incidents_; }
  const ToolRegistry& tools() const { return tools_; }
  const AgentOptions& options() const { return opt_; }

  // Backend calls per mode ("selection" for mode-selection prompts) and
  // stored-workflow fetches per mode.
  const std::map<std::string, std::size_t>& backend_calls() const { return backend_calls_; }
  const std::map<std::string, std::size_t>& workflow_fetches() const { return workflow_fetches_; }

 private:
  std::string call_backend(const std::string& bucket, const Prompt& p) {
    if (!backend_) throw Error("no backend configured for " + p.task);
    ++backend_calls_[bucket];
    return backend_->complete(p);
  }

  std::string call_backend(const Prompt& p) { return call_backend(to_string(mode_), p); }

  Plan make_plan(const Task& task) {
    if (is_service_kind(task.event_kind)) {
      const int target = task.detail.at("target_load").get<int>();
      if (mode_ == OperationMode::kRuleCentric) {
        ++workflow_fetches_[to_string(mode_)];
        return workflows_.fetch("add_drop", {{"target", std::to_string(target)}});
      }
      return request_plan([this](const Prompt& p) { return call_backend(p); },
                          {"plan", "Channel load change requested: " + std::to_string(target) + " channels.",
                           {{"workflow", "add_drop"}, {"target_load", target}, {"max_iters", opt_.react.max_iters}},
                           {}},
                          tools_);
    }
    return request_plan([this](const Prompt& p) { return call_backend(p); },
                        {"plan", "Alarm raised: " + task.detail.dump(),
                         {{"workflow", "failure"}, {"alarm", task.detail}},
                         {}},
                        tools_);
  }

  std::optional<PlanStep> repair(const PlanStep& failed, const std::exception& e) {
    const std::string type = error_type(e);
    std::optional<int> dark;
    const auto recent = device_.telemetry_since(device_.tick());
    if (!recent.empty())
      if (auto s = first_dark_span(recent.back())) dark = static_cast<int>(*s);
    if (mode_ == OperationMode::kRuleCentric) {
      if (type == "CutLink" && dark)
        return PlanStep{"wait_for_repair", {{"span", std::to_string(*dark)}}, "rule: dark line, wait for the splice"};
      return std::nullopt;
    }
    nlohmann::json payload = {{"tool", failed.tool}, {"error_type", type}, {"error", e.what()}};
    if (dark) payload["dark_span"] = *dark;
    const std::string raw = call_backend({"repair", std::string("Step ") + failed.tool + " failed: " + e.what(),
                                          payload, tools_.names()});
    const auto a = parse_single_action(raw);
    if (a.name == "abort") return std::nullopt;
    return step_from_action(a);
  }

  nlohmann::json config() { return device_.get_config(); }

  telemetry::TelemetryRecord latest_record() {
    const auto recs = device_.telemetry_since(device_.tick());
    if (recs.empty()) throw InsufficientData("no telemetry at tick " + std::to_string(device_.tick()));
    return recs.back();
  }

  void require_lit() {
    if (auto s = first_dark_span(latest_record()))
      throw CutLinkError("span " + std::to_string(*s) + " is dark");
  }

  std::array<double, kSpanCount> datasheet_loss_db(const nlohmann::json& tree) const {
    static const std::regex kAlpha(R"(Attenuation coefficient:\s*([0-9.]+)\s*dB/km)");
    std::optional<double> alpha;
    for (const auto& c : chunks_)
      if (!alpha) alpha = detail::find_number(c.text, kAlpha);
    std::array<double, kSpanCount> out{};
    for (std::size_t s = 0; s < kSpanCount; ++s) {
      const auto& sp = tree.at("spans")[s];
      out[s] = alpha.value_or(sp.at("attenuation_db_per_km").get<double>()) * sp.at("length_km").get<double>();
    }
    return out;
  }

  void apply(const GainConfig& c) {
    device_.edit_config({{"gains_db", c.gains_db}, {"tilts_db", c.tilts_db}});
  }

  static int int_arg(const PlanStep& s, const std::string& key, int fallback) {
    const auto it = s.args.find(key);
    return it == s.args.end() ? fallback : parse_int(it->second);
  }

  void register_tools() {
    tools_.add({"set_load", {"target"}, {}, [this](const PlanStep& s) {
                  const int target = parse_int(s.args.at("target"));
                  const auto applied = device_.edit_config({{"load", target}});
                  return ToolResult{"load set to " + std::to_string(target), applied, {}};
                }});

    tools_.add({"set_gain", {"amp", "gain"}, {}, [this](const PlanStep& s) {
                  const int amp = parse_int(s.args.at("amp"));
                  const double gain = parse_number(s.args.at("gain"));
                  const auto applied = device_.edit_config({{"amplifiers", {{{"id", amp}, {"gain_db", gain}}}}});
                  fit_window_start_ = device_.tick() + 1;
                  return ToolResult{"amplifier " + std::to_string(amp) + " gain set to " + format_double(gain) + " dB",
                                    applied, {}};
                }});

    // Four gain patterns held for a few ticks each, then the starting point
    // again. Gives the fit distinct operating points at the current load.
    tools_.add({"probe_gains", {}, {"hold"}, [this](const PlanStep& s) {
                  require_lit();
                  const int hold = int_arg(s, "hold", opt_.probe_hold_ticks);
                  const GainConfig base = config_of(config());
                  const std::array<std::array<double, kAmplifierCount>, 3> deltas = {
                      {{1, -1, 1, -1, 1, -1}, {-1, 1, -1, 1, -1, 1}, {1, 1, -1, -1, 1, 1}}};
                  apply(base);
                  device_.advance(hold);
                  for (const auto& d : deltas) {
                    GainConfig c = base;
                    for (std::size_t k = 0; k < kAmplifierCount; ++k) c.gains_db[k] += d[k];
                    apply(c.clamped());
                    device_.advance(hold);
                  }
                  apply(base);
                  return ToolResult{"probed 4 gain patterns for " + std::to_string(hold) + " ticks each",
                                    {{"hold", hold}}, {}};
                }});

    tools_.add({"fit_twin", {}, {}, [this](const PlanStep&) {
                  const int from = std::max(fit_window_start_, device_.tick() - opt_.fit_window_ticks + 1);
                  const auto recs = device_.telemetry_since(from);
                  twin::TwinParameters p = twin_;
                  const auto report = twin::fit(p, nominal_, recs, opt_.fit);
                  twin_ = calibrated_ = p;
                  fitted_ = true;
                  return ToolResult{"twin fitted on " + std::to_string(report.records_used) + " records, rmse " +
                                        format_double(std::round(report.residual_rmse_db * 1000) / 1000) + " dB",
                                    {{"iterations", report.iterations}, {"records", report.records_used},
                                     {"rmse_db", report.residual_rmse_db}, {"converged", report.converged},
                                     {"twin", twin::to_json(twin_)}},
                                    {}};
                }});

    tools_.add({"optimize_power", {}, {}, [this](const PlanStep&) {
                  require_lit();
                  const auto tree = config();
                  opt::TwinEnvironment env(nominal_, twin_, grid_of(tree, nominal_.grid));
                  auto report = opt::coordinate_ascent(env, config_of(tree), opt_.optimize);
                  apply(report.best_config);
                  ToolResult r{"applied " + report.best_config.to_string() + ", predicted min-Q " +
                                   format_double(std::round(report.best_value * 1000) / 1000) + " dB after " +
                                   std::to_string(report.evaluations) + " evaluations",
                               {{"gains_db", report.best_config.gains_db}, {"predicted_db", report.best_value},
                                {"evaluations", report.evaluations}},
                               {}};
                  last_optimization_ = std::move(report);
                  return r;
                }});

    tools_.add({"react_optimize", {}, {"max_iters"}, [this](const PlanStep& s) {
                  require_lit();
                  ReactOptions ro = opt_.react;
                  ro.max_iters = int_arg(s, "max_iters", ro.max_iters);
                  ro.schedule = opt_.optimize;
                  DeviceEnvironment env(device_);
                  auto report = react_optimize(env, *counted_backend(), config_of(config()), ro);
                  apply(report.best_config);
                  ToolResult r{"applied " + report.best_config.to_string() + ", measured min-Q " +
                                   format_double(report.best_value) + " dB after " +
                                   std::to_string(report.evaluations) + " evaluations",
                               {{"gains_db", report.best_config.gains_db}, {"measured_db", report.best_value},
                                {"evaluations", report.evaluations}},
                               {}};
                  last_optimization_ = std::move(report);
                  return r;
                }});

    tools_.add({"sync_twin", {}, {"ticks"}, [this](const PlanStep& s) {
                  if (!fitted_) throw InsufficientData("twin has not been fitted yet");
                  const int ticks = int_arg(s, "ticks", opt_.sync_ticks);
                  device_.advance(ticks);
                  const auto recs = device_.telemetry_since(device_.tick() - ticks + 1);
                  const auto tree = config();
                  double err = 0.0;
                  try {
                    err = twin::rmse(twin_, nominal_, recs);
                  } catch (const twin::EmptyDataset&) {
                  }
                  return ToolResult{"twin tracked " + std::to_string(ticks) + " ticks, Q rmse " +
                                        format_double(std::round(err * 1000) / 1000) + " dB",
                                    {{"rmse_db", err}, {"twin", twin::to_json(twin_)}}, {}};
                }});

    tools_.add({"retrieve_docs", {"query"}, {"k"}, [this](const PlanStep& s) {
                  chunks_ = docs_.retrieve(s.args.at("query"), static_cast<std::size_t>(int_arg(s, "k", 3)));
                  nlohmann::json hits = nlohmann::json::array();
                  std::string text = "retrieved";
                  for (const auto& c : chunks_) {
                    hits.push_back({{"doc", c.doc_id}, {"score", c.score}});
                    text += " " + c.doc_id;
                  }
                  return ToolResult{text, {{"hits", hits}}, {}};
                }});

    tools_.add({"localize_failure", {}, {}, [this](const PlanStep&) { return localize(); }});

    tools_.add({"generate_recovery", {}, {}, [this](const PlanStep&) {
                  if (!localization_) throw LocalizationFailed("nothing localized yet");
                  const auto tree = config();
                  double excess = 0.0;
                  if (localization_->kind == FailureKind::kAging) {
                    const auto recs = device_.telemetry_since(device_.tick() - 29);
                    const auto measured = measured_excess_db(recs, datasheet_loss_db(tree));
                    // Loss present at the last calibration is already compensated.
                    const auto s = static_cast<std::size_t>(localization_->span);
                    excess = measured[s] - (fitted_ ? calibrated_.extra_loss_db[s] : 0.0);
                  }
                  auto steps = generate_recovery(*localization_, config_of(tree), excess);
                  std::string text = "recovery:";
                  for (const auto& st : steps) text += " " + st.action_line().substr(8) + ";";
                  return ToolResult{text, {{"excess_db", excess}}, std::move(steps)};
                }});

    tools_.add({"wait_for_repair", {"span"}, {}, [this](const PlanStep& s) {
                  const auto span = static_cast<std::size_t>(parse_int(s.args.at("span")));
                  if (span >= kSpanCount) throw ValidationError("span id out of range");
                  const int start = device_.tick();
                  while (!latest_record().osc_alive[span]) {
                    if (device_.tick() - start > opt_.repair_timeout_ticks)
                      throw Error("span " + std::to_string(span) + " still dark after " +
                                  std::to_string(opt_.repair_timeout_ticks) + " ticks");
                    device_.advance(1);
                  }
                  fit_window_start_ = device_.tick();
                  return ToolResult{"span " + std::to_string(span) + " lit again at tick " +
                                        std::to_string(device_.tick()),
                                    {{"waited_ticks", device_.tick() - start}}, {}};
                }});
  }

  ToolResult localize() {
    const int now = device_.tick();
    const auto tree = config();
    const auto recs = device_.telemetry_since(now - opt_.evidence_ticks + 1);
    if (recs.empty()) throw InsufficientData("no telemetry to localize with");
    nlohmann::json telemetry = nlohmann::json::array();
    for (const auto& r : recs)
      telemetry.push_back({{"tick", r.tick}, {"amp_in_dbm", r.amp_in_dbm}, {"amp_out_dbm", r.amp_out_dbm},
                           {"osc_alive", r.osc_alive}});
    std::vector<int> los_spans;
    nlohmann::json alarms = nlohmann::json::array();
    nlohmann::json logs = nlohmann::json::array();
    std::string context;
    const int from = task_ ? std::min(task_->tick, now) - opt_.evidence_ticks : now - opt_.evidence_ticks;
    for (const auto& e : device_.get_logs(from, now)) {
      logs.push_back(std::to_string(e.tick) + " " + e.source + " " + e.text);
      context += std::to_string(e.tick) + " " + e.source + " " + e.text + "\n";
      if (e.source == "analytics") {
        alarms.push_back(e.payload);
        if (e.payload.value("kind", "") == "LossOfSignal") los_spans.push_back(e.payload.value("subject", -1));
      }
    }
    nlohmann::json chunks = nlohmann::json::array();
    for (const auto& c : chunks_) {
      chunks.push_back({{"doc_id", c.doc_id}, {"text", c.text}});
      context += "[" + c.doc_id + "]\n" + c.text;
    }
    Prompt p{"localize", context,
             {{"telemetry", telemetry}, {"alarms", alarms}, {"logs", logs}, {"chunks", chunks},
              {"spans", tree.at("spans")}},
             {"report_failure"}};
    const auto latest = recs.back();
    const int phase = transcript_ && !transcript_->entries.empty() ? transcript_->entries.back().phase : 0;
    std::string reason;
    for (int attempt = 0; attempt < 2; ++attempt) {
      const std::string raw = call_backend(p);
      Localization loc;
      try {
        const Action a = parse_single_action(raw);
        if (transcript_) transcript_->thought(now, phase, a.thought.empty() ? a.line : a.thought, raw);
        loc = parse_localization(a);
      } catch (const MalformedAction& e) {
        if (transcript_) transcript_->thought(now, phase, std::string("malformed reply: ") + e.what(), raw);
        reason = e.what();
        p.payload["rejected"] = reason;
        continue;
      }
      if (auto why = contradiction(loc, latest, los_spans)) {
        reason = *why;
        p.payload["rejected"] = reason;
        if (transcript_) transcript_->thought(now, phase, "localization rejected: " + reason);
        continue;
      }
      localization_ = loc;
      if (!incidents_.empty() && transcript_) {
        auto& inc = incidents_.back();
        inc.localization = loc;
        inc.actions_to_localize = transcript_->action_count();
        inc.localized_tick = now;
      }
      return {"span " + std::to_string(loc.span) + " " + to_string(loc.kind),
              {{"span", loc.span}, {"kind", to_string(loc.kind)}, {"raw", raw}}, {}};
    }
    throw LocalizationFailed("localization rejected twice: " + reason);
  }

  // Adapter that charges backend calls made inside react_optimize to the
  // current mode.
  class CountedBackend : public LlmBackend {
   public:
    explicit CountedBackend(Agent& a) : a_(a) {}
    std::string complete(const Prompt& p) override { return a_.call_backend(p); }
    std::string name() const override { return a_.backend_ ? a_.backend_->name() : "none"; }

   private:
    Agent& a_;
  };

  LlmBackend* counted_backend() {
    if (!counted_) counted_ = std::make_unique<CountedBackend>(*this);
    return counted_.get();
  }

  Device& device_;
  physics::LinkTopology nominal_;
  DocumentStore docs_;
  LlmBackend* backend_;
  AgentOptions opt_;
  WorkflowStore workflows_;
  ToolRegistry tools_;
  std::unique_ptr<CountedBackend> counted_;

  OperationMode mode_ = OperationMode::kRuleCentric;
  const Task* task_ = nullptr;
  Transcript* transcript_ = nullptr;
  std::vector<RetrievedChunk> chunks_;
  std::optional<Localization> localization_;
  std::optional<opt::OptimizerReport> last_optimization_;
  std::vector<Incident> incidents_;

  twin::TwinParameters twin_;
  twin::TwinParameters calibrated_;  // as of the last fit, before syncing
  bool fitted_ = false;
  int fit_window_start_ = 0;

  std::map<std::string, std::size_t> backend_calls_;
  std::map<std::string, std::size_t> workflow_fetches_;
};

}  // namespace adon::agent

#endif  // ADON_AGENT_AGENT_HPP_
