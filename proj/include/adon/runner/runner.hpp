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

#ifndef ADON_RUNNER_RUNNER_HPP_
#define ADON_RUNNER_RUNNER_HPP_

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adon/agent/agent.hpp"
#include "adon/agent/device.hpp"
#include "adon/agent/retrieval.hpp"
#include "adon/agent/transcript.hpp"
#include "adon/control/service.hpp"
#include "adon/optimizer/environment.hpp"
#include "adon/optimizer/search.hpp"
#include "adon/scenario/network_state.hpp"
#include "adon/scenario/scenario.hpp"
#include "adon/telemetry/csv.hpp"
#include "adon/twin/twin.hpp"

namespace adon::runner {

struct RunOptions {
  std::uint64_t seed = 7;
  physics::LinkTopology nominal;
  std::string docs_dir = std::string(ADON_DATA_DIR) + "/docs";
  agent::AgentOptions agent;
  // Evaluation hooks. They read hidden plant state and never feed the agent.
  bool brute_force_check = true;
  std::vector<int> dt_test_ticks = {299, 799, 2099};
  std::vector<std::string> dt_test_stages = {"pre-cut", "post-cut", "post-aging"};
  int dt_test_size = 300;
  std::vector<int> truth_q_ticks = {1699, 2099};
  int max_ticks = -1;  // stop early; -1 runs the whole scenario
};

struct AddDropEval {
  std::string task_id;
  int tick = 0;
  int target_load = 0;
  GainConfig config;
  double agent_db = 0.0;   // noise-free min-Q of the applied configuration
  double oracle_db = 0.0;  // default-grid brute force on the true plant
  double gap_db = 0.0;     // oracle - agent; negative when the agent beats the grid
};

struct DtEval {
  int tick = 0;
  std::string stage;
  std::size_t samples = 0;
  double nominal_rmse_db = 0.0;
  double fitted_rmse_db = 0.0;
};

struct TaskSummary {
  std::string id;
  std::string kind;
  std::string mode;
  int tick = 0;
  int done_tick = 0;
  bool success = false;
  bool skipped = false;  // alarm raised while an earlier incident was being handled
  std::string error;
  std::size_t actions = 0;
};

struct ForecastEval {
  int tick = -1;
  int span = -1;
  double truth_aging_db = 0.0;  // cumulative aging on that span when the alarm fired
};

struct QTraceRow {
  int tick = 0;
  int load = 0;
  std::optional<double> min_q_db;
  std::optional<double> twin_min_q_db;
};

struct RunResult {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<telemetry::TelemetryRecord> telemetry;
  std::vector<telemetry::Alarm> alarms;
  std::vector<agent::Transcript> transcripts;
  std::vector<TaskSummary> tasks;
  std::vector<AddDropEval> add_drop;
  std::vector<DtEval> dt;
  std::vector<agent::Incident> incidents;
  std::optional<ForecastEval> forecast;
  std::map<int, double> truth_min_q_db;
  std::vector<QTraceRow> q_trace;
  std::vector<control::LogEntry> logs;
  std::map<std::string, std::size_t> backend_calls;
  std::map<std::string, std::size_t> workflow_fetches;
  twin::TwinParameters final_twin;
  nlohmann::json mode_table;

  double mean_gap_db() const {
    if (add_drop.empty()) return 0.0;
    double s = 0.0;
    for (const auto& e : add_drop) s += e.gap_db;
    return s / static_cast<double>(add_drop.size());
  }
};

// Held-out records around the current operating point: random load and
// gains within 2 dB of the running configuration, sampled from a copy of
// the plant with its own noise stream.
inline std::vector<telemetry::TelemetryRecord> dt_test_set(const scenario::NetworkState& state, std::uint64_t seed,
                                                           int n) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> batches(1, scenario::kMaxLoad / scenario::kBatchSize);
  std::uniform_real_distribution<double> jitter(-2.0, 2.0);
  telemetry::TelemetrySampler sampler(seed ^ 0xd7e5'7000ULL);
  std::vector<telemetry::TelemetryRecord> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    scenario::NetworkState s = state;
    scenario::apply_wavelength_change(s, batches(rng) * scenario::kBatchSize);
    GainConfig c = state.config();
    for (auto& g : c.gains_db) g += jitter(rng);
    s.set_config(c.clamped());
    out.push_back(sampler.sample(s));
  }
  return out;
}

inline RunResult run(const scenario::Scenario& sc, const RunOptions& opt, agent::LlmBackend* backend) {
  RunResult res;
  res.scenario = sc.name;
  res.seed = opt.seed;
  res.mode_table = opt.agent.modes.to_json();

  control::ServiceOptions so;
  so.seed = opt.seed;
  so.nominal = opt.nominal;
  so.ring_capacity = static_cast<std::size_t>(std::max(10000, sc.duration_ticks() + 1));
  so.service_policy = scenario::ServicePolicy::kDefer;
  control::NetworkService service(sc, so);

  std::deque<agent::Task> pending;
  std::size_t next_task = 0;
  std::unique_ptr<agent::Agent> ag;
  auto new_id = [&] { return "task-" + std::to_string(next_task++); };

  auto step_once = [&] {
    auto r = service.step();
    ag->observe(r.record);
    for (const auto& e : r.events)
      if (e.is_service())
        pending.push_back({new_id(), scenario::kind_name(e.kind), r.tick, {{"target_load", e.target_load()}}});
    for (const auto& a : r.alarms) {
      res.alarms.push_back(a);
      pending.push_back({new_id(), telemetry::to_string(a.kind), r.tick, a.to_json()});
      if (a.kind == telemetry::AlarmKind::kDegradationForecast && !res.forecast) {
        const auto st = service.state_copy();
        res.forecast = ForecastEval{r.tick, a.subject,
                                    st.ground_truth().aging_db[static_cast<std::size_t>(a.subject)]};
      }
    }
    QTraceRow row{r.tick, r.record.load(), r.record.min_q_db(), std::nullopt};
    const bool lit = r.record.all_osc_alive();
    if (ag->twin_fitted() && lit && r.record.load() > 0) {
      physics::ChannelGrid grid = opt.nominal.grid;
      grid.active = r.record.active;
      grid.is_real = r.record.real;
      row.twin_min_q_db = twin::predict(ag->twin(), opt.nominal, r.record.config, grid).min_real_q_db();
    }
    res.q_trace.push_back(row);

    const auto dt_it = std::find(opt.dt_test_ticks.begin(), opt.dt_test_ticks.end(), r.tick);
    if (dt_it != opt.dt_test_ticks.end()) {
      const auto idx = static_cast<std::size_t>(dt_it - opt.dt_test_ticks.begin());
      const auto set = dt_test_set(service.state_copy(), opt.seed * 1000003ULL + static_cast<std::uint64_t>(r.tick),
                                   opt.dt_test_size);
      DtEval ev;
      ev.tick = r.tick;
      ev.stage = idx < opt.dt_test_stages.size() ? opt.dt_test_stages[idx] : "t" + std::to_string(r.tick);
      ev.samples = set.size();
      ev.nominal_rmse_db = twin::rmse(twin::TwinParameters{}, opt.nominal, set);
      ev.fitted_rmse_db = twin::rmse(ag->twin(), opt.nominal, set);
      res.dt.push_back(ev);
    }
    if (std::find(opt.truth_q_ticks.begin(), opt.truth_q_ticks.end(), r.tick) != opt.truth_q_ticks.end()) {
      const auto st = service.state_copy();
      try {
        res.truth_min_q_db[r.tick] = opt::truth_environment(st).value(st.config());
      } catch (const Error&) {
      }
    }
  };

  agent::LocalDevice device(service, step_once);
  ag = std::make_unique<agent::Agent>(device, opt.nominal, agent::DocumentStore::load_directory(opt.docs_dir),
                                      backend, opt.agent);

  int handled_until = -1;  // completion tick of the last successful incident
  while (!service.finished() && (opt.max_ticks < 0 || service.tick() < opt.max_ticks)) {
    step_once();
    while (!pending.empty()) {
      const agent::Task task = pending.front();
      pending.pop_front();
      TaskSummary ts{task.id, task.event_kind, "", task.tick, service.tick(), false, false, "", 0};
      if (agent::is_failure_kind(task.event_kind) && task.tick <= handled_until) {
        ts.skipped = true;
        ts.success = true;
        ts.error = "covered by the incident handled until tick " + std::to_string(handled_until);
        res.tasks.push_back(ts);
        continue;
      }
      auto tr = ag->handle(task);
      ts.mode = agent::to_string(tr.transcript.mode);
      ts.done_tick = service.tick();
      ts.success = tr.success;
      ts.error = tr.error;
      ts.actions = tr.transcript.action_count();
      res.tasks.push_back(ts);
      if (agent::is_failure_kind(task.event_kind) && tr.success) handled_until = service.tick();

      if (agent::is_service_kind(task.event_kind) && tr.success && opt.brute_force_check) {
        const auto st = service.state_copy();
        auto truth = opt::truth_environment(st);
        AddDropEval ev;
        ev.task_id = task.id;
        ev.tick = service.tick();
        ev.target_load = task.detail.at("target_load").get<int>();
        ev.config = st.config();
        ev.agent_db = truth.value(st.config());
        ev.oracle_db = opt::brute_force(truth, opt::default_gain_grid()).best_value;
        ev.gap_db = ev.oracle_db - ev.agent_db;
        res.add_drop.push_back(ev);
      }
      res.transcripts.push_back(std::move(tr.transcript));
    }
  }

  res.telemetry = service.telemetry_all();
  res.incidents = ag->incidents();
  res.logs = service.logs().all();
  res.backend_calls = ag->backend_calls();
  res.workflow_fetches = ag->workflow_fetches();
  res.final_twin = ag->twin();
  return res;
}

namespace detail {

inline nlohmann::json opt_num(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::string csv_num(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", *v);
  return buf;
}

}  // namespace detail

inline void write_q_trace(std::ostream& os, const std::vector<QTraceRow>& rows) {
  os << "tick,load,min_q_db,twin_min_q_db\n";
  for (const auto& r : rows)
    os << r.tick << ',' << r.load << ',' << detail::csv_num(r.min_q_db) << ',' << detail::csv_num(r.twin_min_q_db)
       << '\n';
}

inline nlohmann::json summary_json(const RunResult& r) {
  nlohmann::json add_drop = nlohmann::json::array();
  for (const auto& e : r.add_drop)
    add_drop.push_back({{"task", e.task_id}, {"tick", e.tick}, {"target_load", e.target_load},
                        {"gains_db", e.config.gains_db}, {"agent_min_q_db", e.agent_db},
                        {"oracle_min_q_db", e.oracle_db}, {"gap_db", e.gap_db}});
  nlohmann::json dt = nlohmann::json::array();
  for (const auto& e : r.dt)
    dt.push_back({{"tick", e.tick}, {"stage", e.stage}, {"samples", e.samples},
                  {"nominal_rmse_db", e.nominal_rmse_db}, {"fitted_rmse_db", e.fitted_rmse_db}});
  nlohmann::json incidents = nlohmann::json::array();
  for (const auto& i : r.incidents) incidents.push_back(agent::to_json(i));
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : r.tasks)
    tasks.push_back({{"id", t.id}, {"kind", t.kind}, {"mode", t.mode}, {"tick", t.tick}, {"done_tick", t.done_tick},
                     {"success", t.success}, {"skipped", t.skipped}, {"error", t.error}, {"actions", t.actions}});
  nlohmann::json truth_q = nlohmann::json::object();
  for (const auto& [tick, q] : r.truth_min_q_db) truth_q[std::to_string(tick)] = q;
  nlohmann::json forecast = nullptr;
  if (r.forecast)
    forecast = {{"tick", r.forecast->tick}, {"span", r.forecast->span},
                {"truth_aging_db", r.forecast->truth_aging_db}};
  return {{"scenario", r.scenario},
          {"seed", r.seed},
          {"mode_table", r.mode_table},
          {"brute_force_gap_mean_db", r.mean_gap_db()},
          {"add_drop", add_drop},
          {"twin_rmse", dt},
          {"incidents", incidents},
          {"forecast", forecast},
          {"truth_min_q_db", truth_q},
          {"tasks", tasks},
          {"backend_calls", r.backend_calls},
          {"workflow_fetches", r.workflow_fetches},
          {"alarm_count", r.alarms.size()}};
}

// Writes every artifact into a fresh sibling directory, then renames it
// into place so readers never see a half-written run.
inline void write_artifacts(const RunResult& r, const std::string& out_dir, const nlohmann::json& manifest) {
  namespace fs = std::filesystem;
  const fs::path out(out_dir);
  if (fs::exists(out) && !(fs::is_directory(out) && fs::is_empty(out)))
    throw ValidationError("output directory " + out_dir + " exists and is not empty");
  const fs::path parent = out.has_parent_path() ? out.parent_path() : fs::path(".");
  fs::create_directories(parent);
  const fs::path tmp = parent / (out.filename().string() + ".partial");
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  auto open = [&](const char* name) {
    std::ofstream f(tmp / name, std::ios::binary);
    if (!f) throw Error(std::string("cannot write ") + name);
    return f;
  };
  { auto f = open("telemetry.csv"); telemetry::write_csv(f, r.telemetry); }
  { auto f = open("alarms.jsonl"); telemetry::write_alarms_jsonl(f, r.alarms); }
  { auto f = open("transcripts.jsonl"); for (const auto& t : r.transcripts) agent::write_jsonl(f, t); }
  { auto f = open("q_trace.csv"); write_q_trace(f, r.q_trace); }
  {
    auto f = open("twin_report.json");
    nlohmann::json sets = nlohmann::json::array();
    for (const auto& e : r.dt)
      sets.push_back({{"tick", e.tick}, {"stage", e.stage}, {"samples", e.samples},
                      {"nominal_rmse_db", e.nominal_rmse_db}, {"fitted_rmse_db", e.fitted_rmse_db}});
    f << nlohmann::json{{"test_sets", sets}, {"final_twin", twin::to_json(r.final_twin)}}.dump(2) << '\n';
  }
  { auto f = open("summary.json"); f << summary_json(r).dump(2) << '\n'; }
  { auto f = open("logs.jsonl"); for (const auto& e : r.logs) f << control::to_json(e).dump() << '\n'; }
  { auto f = open("manifest.json"); f << manifest.dump(2) << '\n'; }
  if (fs::exists(out)) fs::remove(out);
  fs::rename(tmp, out);
}

}  // namespace adon::runner

#endif  // ADON_RUNNER_RUNNER_HPP_
