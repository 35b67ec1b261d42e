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


// adon: run lifecycle scenarios, compare optimizers, replay transcripts.
//
// Exit codes: 0 success, 1 internal error, 2 usage or input error.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adon/agent/mode.hpp"
#include "adon/agent/remote_chat.hpp"
#include "adon/agent/scripted.hpp"
#include "adon/agent/transcript.hpp"
#include "adon/core/error.hpp"
#include "adon/physics/io.hpp"
#include "adon/runner/experiments.hpp"
#include "adon/runner/runner.hpp"
#include "adon/runner/serve.hpp"
#include "adon/scenario/scenario.hpp"

namespace {

namespace fs = std::filesystem;
using namespace adon;

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kUsage = 2;

// Input problems the operator can fix: bad files, bad values.
class InputError : public Error {
 public:
  using Error::Error;
};

void require_file(const std::string& what, const std::string& path) {
  if (!fs::is_regular_file(path)) throw InputError(what + " not found: " + path);
}

physics::LinkTopology load_link(const std::string& path) {
  if (path.empty()) return physics::LinkTopology{};
  require_file("link config", path);
  return physics::load_link_config(path);
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunArgs {
  std::string scenario = "canonical";
  std::uint64_t seed = 7;
  std::string out;
  std::string mode_table;
  std::string backend = "scripted";
  std::string backend_config;
  std::string link;
  std::string docs;
  bool serve = false;
  int tick_us = 2000;
  bool no_eval = false;
};

int cmd_run(const RunArgs& a) {
  if (a.scenario != "canonical") require_file("scenario file", a.scenario);
  const auto sc = scenario::resolve_scenario(a.scenario);

  runner::RunOptions opt;
  opt.seed = a.seed;
  opt.nominal = load_link(a.link);
  if (!a.docs.empty()) {
    if (!fs::is_directory(a.docs)) throw InputError("document directory not found: " + a.docs);
    opt.docs_dir = a.docs;
  }
  if (!a.mode_table.empty()) {
    require_file("mode table", a.mode_table);
    opt.agent.modes = agent::ModeTable::load(a.mode_table);
  }
  opt.brute_force_check = !a.no_eval;
  if (a.no_eval) opt.dt_test_ticks.clear();

  std::unique_ptr<agent::LlmBackend> backend;
  if (a.backend == "scripted") {
    backend = std::make_unique<agent::ScriptedPolicy>();
  } else {
    if (a.backend_config.empty()) throw InputError("--backend remote needs --backend-config");
    require_file("backend config", a.backend_config);
    backend = std::make_unique<agent::RemoteChat>(agent::RemoteChatConfig::load(a.backend_config));
  }

  if (fs::exists(a.out) && !(fs::is_directory(a.out) && fs::is_empty(a.out)))
    throw InputError("output directory exists and is not empty: " + a.out);

  const auto result = a.serve ? runner::run_served(sc, opt, backend.get(), {std::chrono::microseconds(a.tick_us)})
                              : runner::run(sc, opt, backend.get());

  const nlohmann::json manifest = {{"scenario", a.scenario},
                                   {"scenario_name", sc.name},
                                   {"seed", a.seed},
                                   {"mode_table", opt.agent.modes.to_json()},
                                   {"mode_table_file", a.mode_table},
                                   {"backend", a.backend},
                                   {"link", a.link.empty() ? "built-in" : a.link},
                                   {"serve", a.serve},
                                   {"out", a.out},
                                   {"created_utc", utc_now()}};
  runner::write_artifacts(result, a.out, manifest);

  std::cout << "wrote " << a.out << ": " << result.tasks.size() << " tasks, " << result.alarms.size() << " alarms";
  if (!result.add_drop.empty())
    std::cout << ", mean brute-force gap " << format_double(result.mean_gap_db()) << " dB";
  std::cout << '\n';
  for (const auto& t : result.tasks)
    if (!t.success) std::cerr << "task " << t.id << " (" << t.kind << ") failed: " << t.error << '\n';
  return kOk;
}

struct OptimizeArgs {
  std::string method;
  std::uint64_t seed = 0;
  int budget = 100;
  int load = 20;
  std::string out;
  std::string link;
  bool tilts = false;
  bool no_oracle = false;
};

int cmd_optimize(const OptimizeArgs& a) {
  if (!runner::is_method(a.method)) throw InputError("unknown method '" + a.method + "'");
  auto env = runner::optimizer_instance(a.seed, a.load, load_link(a.link));
  runner::MethodOptions mo;
  mo.seed = a.seed;
  mo.budget = a.budget;
  mo.coord.include_tilts = a.tilts;
  const auto report = runner::run_method(env, a.method, mo);
  std::optional<double> oracle;
  if (a.method == "brute") oracle = report.best_value;
  else if (!a.no_oracle) oracle = opt::brute_force(env, opt::default_gain_grid()).best_value;

  if (a.out.empty() || a.out == "-") {
    runner::write_trace_with_footer(std::cout, report, oracle);
  } else {
    std::ofstream f(a.out, std::ios::binary);
    if (!f) throw InputError("cannot write " + a.out);
    runner::write_trace_with_footer(f, report, oracle);
    std::cerr << a.method << ": " << report.evaluations << " evaluations, best " << format_double(report.best_value)
              << " dB";
    if (oracle) std::cerr << ", gap to oracle " << format_double(*oracle - report.best_value) << " dB";
    std::cerr << '\n';
  }
  return kOk;
}

int cmd_replay(const std::string& path) {
  require_file("transcript file", path);
  std::ifstream in(path, std::ios::binary);
  std::cout << agent::render_report(agent::read_transcripts(in));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Autonomous optical line: scenarios, optimizers, transcripts"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a lifecycle scenario end to end and write its artifacts");
  run_cmd->add_option("--scenario", run.scenario, "'canonical' or a scenario file")->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Plant and noise seed")->capture_default_str();
  run_cmd->add_option("--out", run.out, "Output directory (must not exist or be empty)")->required();
  run_cmd->add_option("--mode-table", run.mode_table, "JSON object mapping event kind to operation mode");
  run_cmd->add_option("--backend", run.backend, "Agent backend")
      ->check(CLI::IsMember({"scripted", "remote"}))
      ->capture_default_str();
  run_cmd->add_option("--backend-config", run.backend_config, "JSON config for --backend remote");
  run_cmd->add_option("--link", run.link, "Link config file (default: built-in datasheet values)");
  run_cmd->add_option("--docs", run.docs, "Document directory for retrieval");
  run_cmd->add_flag("--serve", run.serve, "Run the agent against the control-plane server over TCP");
  run_cmd->add_option("--tick-us", run.tick_us, "Clock period with --serve, microseconds")
      ->check(CLI::Range(100, 1000000))
      ->capture_default_str();
  run_cmd->add_flag("--no-eval", run.no_eval, "Skip the brute-force and twin test-set evaluations");

  OptimizeArgs optimize;
  auto* opt_cmd = app.add_subcommand("optimize", "Run one optimizer on a seeded plant and print its trace CSV");
  opt_cmd->add_option("--method", optimize.method, "brute, bo, coord or react")->required();
  opt_cmd->add_option("--seed", optimize.seed, "Plant seed, also seeds bo")->capture_default_str();
  opt_cmd->add_option("--budget", optimize.budget, "Evaluation budget for bo")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  opt_cmd->add_option("--load", optimize.load, "Lit channels (multiple of 5)")->capture_default_str();
  opt_cmd->add_option("--out", optimize.out, "Trace file (default stdout)");
  opt_cmd->add_option("--link", optimize.link, "Link config file");
  opt_cmd->add_flag("--tilts", optimize.tilts, "Let coord and react move tilts too");
  opt_cmd->add_flag("--no-oracle", optimize.no_oracle, "Skip the brute-force comparison in the footer");

  std::string transcript;
  auto* replay_cmd = app.add_subcommand("replay", "Render a transcripts.jsonl file as text");
  replay_cmd->add_option("file", transcript, "Transcript file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*opt_cmd) return cmd_optimize(optimize);
    if (*replay_cmd) return cmd_replay(transcript);
  } catch (const InputError& e) {
    std::cerr << "adon: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "adon: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationError& e) {
    std::cerr << "adon: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "adon: internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}
