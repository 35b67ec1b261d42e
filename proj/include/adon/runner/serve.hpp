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


#ifndef ADON_RUNNER_SERVE_HPP_
#define ADON_RUNNER_SERVE_HPP_

#include <atomic>
#include <chrono>
#include <deque>
#include <string>
#include <thread>

#include "adon/agent/agent.hpp"
#include "adon/agent/remote_device.hpp"
#include "adon/control/client.hpp"
#include "adon/control/server.hpp"
#include "adon/control/service.hpp"
#include "adon/runner/runner.hpp"

namespace adon::runner {

struct ServeOptions {
  std::chrono::microseconds tick_period{2000};
  std::uint16_t port = 0;  // 0 picks a free port
};

// Two-sided run: the service and its clock sit behind a TCP control-plane
// server, and the agent drives the line through a client connection. The
// clock does not wait for the agent, so results depend on timing; the
// in-process run() is the reproducible one. Hidden-state evaluations are
// not available here.
inline RunResult run_served(const scenario::Scenario& sc, const RunOptions& opt, agent::LlmBackend* backend,
                            const ServeOptions& serve = {}) {
  RunResult res;
  res.scenario = sc.name;
  res.seed = opt.seed;
  res.mode_table = opt.agent.modes.to_json();

  control::ServiceOptions so;
  so.seed = opt.seed;
  so.nominal = opt.nominal;
  so.ring_capacity = static_cast<std::size_t>(std::max(10000, sc.duration_ticks() + 1));
  so.subscriber_backlog = so.ring_capacity;
  so.service_policy = scenario::ServicePolicy::kDefer;
  control::NetworkService service(sc, so);
  control::TcpServer server(service, serve.port);

  control::Client client("127.0.0.1", server.port());
  agent::RemoteDevice device(client);
  agent::Agent ag(device, opt.nominal, agent::DocumentStore::load_directory(opt.docs_dir), backend, opt.agent);

  std::atomic<bool> stop{false};
  std::thread clock([&] {
    auto next = std::chrono::steady_clock::now();
    while (!stop && !service.finished() && (opt.max_ticks < 0 || service.tick() < opt.max_ticks)) {
      service.step();
      next += serve.tick_period;
      std::this_thread::sleep_until(next);
    }
    server.end_streams();
  });

  std::deque<agent::Task> pending;
  std::size_t next_task = 0;
  std::uint64_t next_seq = 0;
  int seen = -1;
  int handled_until = -1;

  auto catch_up = [&] {
    for (const auto& r : device.telemetry_since(seen + 1)) {
      ag.observe(r);
      QTraceRow row{r.tick, r.load(), r.min_q_db(), std::nullopt};
      if (ag.twin_fitted() && r.all_osc_alive() && r.load() > 0) {
        physics::ChannelGrid grid = opt.nominal.grid;
        grid.active = r.active;
        grid.is_real = r.real;
        row.twin_min_q_db = twin::predict(ag.twin(), opt.nominal, r.config, grid).min_real_q_db();
      }
      res.q_trace.push_back(row);
      seen = r.tick;
    }
    for (const auto& e : device.get_logs(0, seen)) {
      if (e.seq < next_seq) continue;
      next_seq = e.seq + 1;
      if (e.source == "scenario" && e.text.rfind("service request ", 0) == 0) {
        const auto ev = scenario::event_from_json(e.payload);
        pending.push_back({"task-" + std::to_string(next_task++), scenario::kind_name(ev.kind), e.tick,
                           {{"target_load", ev.target_load()}}});
      } else if (e.source == "analytics") {
        const auto a = telemetry::Alarm::from_json(e.payload);
        res.alarms.push_back(a);
        pending.push_back({"task-" + std::to_string(next_task++), telemetry::to_string(a.kind), e.tick, a.to_json()});
      }
    }
  };

  try {
    while (device.wait_beyond(seen)) {
      catch_up();
      while (!pending.empty()) {
        const agent::Task task = pending.front();
        pending.pop_front();
        TaskSummary ts{task.id, task.event_kind, "", task.tick, device.tick(), false, false, "", 0};
        if (agent::is_failure_kind(task.event_kind) && task.tick <= handled_until) {
          ts.skipped = ts.success = true;
          ts.error = "covered by the incident handled until tick " + std::to_string(handled_until);
          res.tasks.push_back(ts);
          continue;
        }
        auto tr = ag.handle(task);
        ts.mode = agent::to_string(tr.transcript.mode);
        ts.done_tick = device.tick();
        ts.success = tr.success;
        ts.error = tr.error;
        ts.actions = tr.transcript.action_count();
        res.tasks.push_back(ts);
        if (agent::is_failure_kind(task.event_kind) && tr.success) handled_until = ts.done_tick;
        res.transcripts.push_back(std::move(tr.transcript));
        catch_up();
      }
    }
    catch_up();
  } catch (...) {
    stop = true;
    clock.join();
    throw;
  }
  clock.join();

  res.telemetry = device.all_records();
  res.incidents = ag.incidents();
  res.logs = service.logs().all();
  res.backend_calls = ag.backend_calls();
  res.workflow_fetches = ag.workflow_fetches();
  res.final_twin = ag.twin();
  client.close();
  server.stop();
  return res;
}

}  // namespace adon::runner

#endif  // ADON_RUNNER_SERVE_HPP_
