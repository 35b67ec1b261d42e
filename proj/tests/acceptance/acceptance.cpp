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


// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria (0 when all pass). Tolerances are fixed here.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "adon/agent/scripted.hpp"
#include "adon/control/protocol.hpp"
#include "adon/control/server.hpp"
#include "adon/control/service.hpp"
#include "adon/core/hash.hpp"
#include "adon/physics/propagation.hpp"
#include "adon/runner/experiments.hpp"
#include "adon/runner/runner.hpp"
#include "adon/scenario/scenario.hpp"
#include "adon/twin/twin.hpp"

namespace {

using namespace adon;
using nlohmann::json;
namespace fs = std::filesystem;

// ---- tolerances
constexpr double kMaxMeanGapDb = 0.3;          // 1
constexpr double kRuntimeLimitS = 300.0;       // 1
constexpr double kDtImprovement = 0.5;         // 2: fitted <= 50% of nominal
constexpr double kNoiseFloorDb = 0.1;          // 2
constexpr double kAboveFloorDb = 0.2;          // 2
constexpr int kCutScenarios = 20;              // 3
constexpr std::size_t kMaxLocalizeSteps = 50;  // 3
constexpr double kForecastBeforeDb = 5.0;      // 4
constexpr double kRecoveryWithinDb = 0.5;      // 4
constexpr double kBoWithinDb = 0.3;            // 5
constexpr int kBoBudget = 100;                 // 5
constexpr int kBoSeeds = 5;                    // 5
constexpr int kBoRequired = 4;                 // 5
constexpr double kNliRel = 1e-12;              // 6
constexpr double kAseRel = 1e-12;              // 6
constexpr double kBookkeepingDb = 1e-9;        // 6
constexpr double kJacobianRel = 1e-4;          // 6

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

runner::RunResult canonical_run(std::uint64_t seed, agent::ModeTable modes = agent::ModeTable::defaults()) {
  runner::RunOptions o;
  o.seed = seed;
  o.agent.modes = modes;
  agent::ScriptedPolicy policy;
  return runner::run(scenario::canonical_scenario(), o, &policy);
}

// ---------------------------------------------------------------- 1

Verdict brute_force_gap(const runner::RunResult& r, double wall_s) {
  std::string per;
  double abs_sum = 0.0;
  bool rule_centric = true;
  for (const auto& e : r.add_drop) {
    per += (per.empty() ? "" : " ") + fmt(e.gap_db);
    abs_sum += std::abs(e.gap_db);
  }
  for (const auto& t : r.tasks)
    if (agent::is_service_kind(t.kind)) rule_centric = rule_centric && t.mode == "RuleCentric" && t.success;
  const double mean = r.mean_gap_db();
  const bool pass = r.add_drop.size() == 5 && rule_centric && mean <= kMaxMeanGapDb && wall_s < kRuntimeLimitS;
  return {pass, "mean shortfall vs default-grid optimum " + fmt(mean) + " dB (<= " + fmt(kMaxMeanGapDb, 1) +
                    "), per event [" + per + "], mean |gap| " +
                    fmt(r.add_drop.empty() ? 0.0 : abs_sum / static_cast<double>(r.add_drop.size())) +
                    " dB, run " + fmt(wall_s, 1) + " s"};
}

// ---------------------------------------------------------------- 2

Verdict dt_improvement(const runner::RunResult& r) {
  bool pass = r.dt.size() == 3;
  std::string per;
  for (const auto& e : r.dt) {
    pass = pass && e.samples == 300 && e.fitted_rmse_db <= kDtImprovement * e.nominal_rmse_db &&
           e.fitted_rmse_db <= kNoiseFloorDb + kAboveFloorDb;
    per += (per.empty() ? "" : ", ") + e.stage + " " + fmt(e.nominal_rmse_db) + " -> " + fmt(e.fitted_rmse_db);
  }
  return {pass, "Q-RMSE nominal -> fitted dB: " + per};
}

// ---------------------------------------------------------------- 3

Verdict cut_localization() {
  std::mt19937_64 rng(20260419);
  std::uniform_int_distribution<int> span(0, static_cast<int>(kSpanCount) - 1);
  std::uniform_int_distribution<int> at(100, 400);
  int ok = 0;
  std::size_t worst_steps = 0;
  std::string misses;
  for (int i = 0; i < kCutScenarios; ++i) {
    const int s = span(rng);
    const int t = at(rng);
    const std::uint64_t seed = rng();
    std::ostringstream text;
    text << "0 establish 4\n" << t << " cut " << s << "\n" << t + 150 << " repair " << s << "\n";
    runner::RunOptions o;
    o.seed = seed;
    o.brute_force_check = false;
    o.dt_test_ticks.clear();
    o.truth_q_ticks.clear();
    agent::ScriptedPolicy policy;
    const auto r = runner::run(scenario::load_scenario(text.str(), "cut"), o, &policy);
    bool hit = false;
    for (const auto& inc : r.incidents) {
      if (inc.alarm_tick < t) continue;
      hit = inc.localization && inc.localization->kind == agent::FailureKind::kCut &&
            inc.localization->span == s && inc.actions_to_localize <= kMaxLocalizeSteps;
      for (const auto& task : r.tasks)
        if (task.id == inc.task_id) hit = hit && task.mode == "LlmCentric";
      worst_steps = std::max(worst_steps, inc.actions_to_localize);
      break;
    }
    if (hit) ++ok;
    else misses += " seed " + std::to_string(seed) + " span " + std::to_string(s);
  }
  return {ok == kCutScenarios, std::to_string(ok) + "/" + std::to_string(kCutScenarios) +
                                   " cuts localized to the injected span as Cut, at most " +
                                   std::to_string(worst_steps) + " actions (limit " +
                                   std::to_string(kMaxLocalizeSteps) + ")" + misses};
}

// ---------------------------------------------------------------- 4

Verdict aging(const runner::RunResult& canonical) {
  // Steep ramp able to reach 6 dB: the forecast must come before 5 dB.
  runner::RunOptions o;
  o.seed = 7;
  o.brute_force_check = false;
  o.dt_test_ticks.clear();
  o.truth_q_ticks.clear();
  agent::ScriptedPolicy policy;
  const auto ramp = runner::run(scenario::load_scenario("0 establish 4\n400 aging 1 0.05 6.0\n", "ramp"), o, &policy);

  bool pass = ramp.forecast.has_value() && ramp.forecast->truth_aging_db < kForecastBeforeDb;
  std::string detail = ramp.forecast ? "6 dB ramp: forecast at " + fmt(ramp.forecast->truth_aging_db, 2) +
                                           " dB cumulative aging (< " + fmt(kForecastBeforeDb, 0) + ")"
                                     : "6 dB ramp: no forecast";
  const auto& f = canonical.forecast;
  const auto& q = canonical.truth_min_q_db;
  const bool have_q = q.count(1699) && q.count(2099);
  pass = pass && f.has_value() && f->truth_aging_db < kForecastBeforeDb && have_q;
  if (have_q) {
    const double drop = q.at(1699) - q.at(2099);
    pass = pass && std::abs(drop) <= kRecoveryWithinDb;
    detail += "; canonical: forecast at " + (f ? fmt(f->truth_aging_db, 2) : std::string("none")) +
              " dB, min-Q pre-aging " + fmt(q.at(1699)) + " post-recovery " + fmt(q.at(2099)) + " (drop " +
              fmt(drop) + " <= " + fmt(kRecoveryWithinDb, 1) + ")";
  }
  for (const auto& inc : canonical.incidents)
    if (inc.alarm_kind == "DegradationForecast")
      pass = pass && inc.success && inc.localization && inc.localization->kind == agent::FailureKind::kAging &&
             f && inc.localization->span == f->span;
  return {pass, detail};
}

// ---------------------------------------------------------------- 5

Verdict optimizer_comparison() {
  int within = 0;
  std::string per;
  for (int seed = 1; seed <= kBoSeeds; ++seed) {
    auto env = runner::optimizer_instance(static_cast<std::uint64_t>(seed), 20, {});
    const double oracle = opt::brute_force(env, opt::default_gain_grid()).best_value;
    runner::MethodOptions mo;
    mo.seed = static_cast<std::uint64_t>(seed);
    mo.budget = kBoBudget;
    const auto bo = runner::run_method(env, "bo", mo);
    const double gap = oracle - bo.best_value;
    if (bo.evaluations == static_cast<std::size_t>(kBoBudget) && gap <= kBoWithinDb) ++within;
    per += (per.empty() ? "" : " ") + fmt(gap);
  }
  bool equal = true;
  for (bool tilts : {false, true}) {
    auto env = runner::optimizer_instance(7, 20, {});
    runner::MethodOptions mo;
    mo.coord.include_tilts = tilts;
    const auto coord = runner::run_method(env, "coord", mo);
    const auto react = runner::run_method(env, "react", mo);
    equal = equal && coord.trace == react.trace && !coord.trace.empty();
  }
  return {within >= kBoRequired && equal,
          "bo budget " + std::to_string(kBoBudget) + " within " + fmt(kBoWithinDb, 1) + " dB on " +
              std::to_string(within) + "/" + std::to_string(kBoSeeds) + " seeds (gaps " + per + "); react trace " +
              (equal ? "equals" : "differs from") + " coordinate ascent"};
}

// ---------------------------------------------------------------- 6

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Verdict physics_properties() {
  using namespace physics;
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_link = [&](int load) {
    LinkTopology link;
    for (int i = 0; i < load; ++i) {
      link.grid.active[i] = true;
      link.grid.is_real[i] = i % 5 == 0;
    }
    for (auto& s : link.spans) {
      s.length_km = 60.0 + 80.0 * u(rng);
      s.attenuation_db_per_km = 0.17 + 0.06 * u(rng);
      s.extra_loss_db = 2.0 * u(rng);
    }
    for (auto& a : link.amplifiers) {
      a.noise_figure_db = 4.0 + 3.0 * u(rng);
      a.gain_db = 10.0 + 15.0 * u(rng);
    }
    return link;
  };

  double nli = 0.0, ase = 0.0, book = 0.0;
  bool monotone = true;
  for (int trial = 0; trial < 200; ++trial) {
    const auto link = random_link(5 * (1 + trial % 6));
    const double p = 1e-5 + 1e-2 * u(rng);
    const int n = 1 + trial % 30;
    const auto& span = link.spans[static_cast<std::size_t>(trial) % kSpanCount];
    nli = std::max(nli, rel_err(nli_power(2.0 * p, span, link.grid, n), 8.0 * nli_power(p, span, link.grid, n)));

    Amplifier amp{10.0 + 15.0 * u(rng), -3.0 + 6.0 * u(rng), 3.0 + 7.0 * u(rng)};
    const PhysicalConstants c;
    const auto slots = link.grid.active_slots();
    std::vector<double> sig(slots.size(), 1e-4), zero(slots.size(), 0.0);
    const auto out = amplify(sig, zero, amp, link.grid, c);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const double g = std::pow(10.0, channel_gain_db(amp, link.grid, slots[i]) / 10.0);
      const double expect = c.planck * link.grid.frequency(slots[i]) * std::pow(10.0, amp.noise_figure_db / 10.0) *
                            (g - 1.0) * c.reference_bandwidth_hz;
      ase = std::max(ase, rel_err(out.ase_w[i], expect));
    }

    LinkTopology clean = link;
    for (auto& a : clean.amplifiers) {
      a.noise_figure_db = -std::numeric_limits<double>::infinity();
      a.tilt_db = 0.0;
    }
    for (auto& s : clean.spans) s.gamma_per_w_km = 0.0;
    const auto snap = transmit(clean, uniform_launch(clean.grid, -18.0));
    double expect_dbm = -18.0;
    for (const auto& a : clean.amplifiers) expect_dbm += a.gain_db;
    for (const auto& s : clean.spans) expect_dbm -= s.total_loss_db();
    for (const auto& ch : snap.channels)
      book = std::max(book, std::abs(10.0 * std::log10(ch.received_power_w / 1e-3) - expect_dbm));

    LinkTopology longer = link;
    longer.spans.push_back(longer.spans.back());
    longer.amplifiers.insert(longer.amplifiers.end() - 1, longer.amplifiers[longer.spans.size() - 1]);
    const auto a = transmit(link, uniform_launch(link.grid, -18.0));
    const auto b = transmit(longer, uniform_launch(link.grid, -18.0));
    for (std::size_t i = 0; i < a.channels.size(); ++i)
      monotone = monotone && *b.channels[i].gsnr_db <= *a.channels[i].gsnr_db + 1e-12;
  }

  scenario::NetworkState state(21);
  scenario::apply_wavelength_change(state, 30);
  telemetry::TelemetrySampler sampler(21);
  std::vector<telemetry::TelemetryRecord> recs;
  std::uniform_real_distribution<double> jitter(-2.0, 2.0);
  for (int i = 0; i < 12; ++i) {
    GainConfig c = GainConfig::flat(18.0);
    for (auto& g : c.gains_db) g += jitter(rng);
    state.set_tick(i);
    state.set_config(c);
    recs.push_back(sampler.sample(state));
  }
  twin::TwinParameters at;
  at.extra_loss_db = {0.4, 1.1, 0.2, 0.9};
  at.nf_db = {4.8, 5.6, 6.1, 5.2, 4.7, 6.3};
  const Eigen::MatrixXd J = twin::fit_jacobian(at, state.nominal(), recs);
  Eigen::MatrixXd N(J.rows(), J.cols());
  for (std::size_t j = 0; j < twin::kParamCount; ++j) {
    auto plus = at.flat(), minus = at.flat();
    plus[j] += 1e-4;
    minus[j] -= 1e-4;
    N.col(static_cast<Eigen::Index>(j)) = (twin::fit_residuals(twin::TwinParameters::from_flat(plus), state.nominal(), recs) -
                                           twin::fit_residuals(twin::TwinParameters::from_flat(minus), state.nominal(), recs)) /
                                          2e-4;
  }
  const double jac = (J - N).norm() / J.norm();

  const bool pass = nli < kNliRel && ase < kAseRel && book < kBookkeepingDb && monotone && jac < kJacobianRel;
  return {pass, "NLI cubic " + sci(nli) + ", ASE " + sci(ase) + ", bookkeeping " + sci(book) +
                    " dB, GSNR monotone in spans " + (monotone ? "yes" : "no") + ", Jacobian vs FD " + sci(jac)};
}

// ---------------------------------------------------------------- 7

std::string fingerprint_run(const runner::RunResult& r, const fs::path& dir, std::string& q_hash) {
  runner::write_artifacts(r, dir.string(), json::object());
  q_hash = file_fingerprint((dir / "q_trace.csv").string());
  return file_fingerprint((dir / "telemetry.csv").string());
}

Verdict systems(const runner::RunResult& first) {
  std::string notes;
  bool pass = true;

  // Wire round trip.
  std::ifstream corpus(std::string(ADON_TEST_DATA_DIR) + "/protocol_corpus.jsonl", std::ios::binary);
  int lines = 0, exact = 0;
  std::string line;
  while (std::getline(corpus, line)) {
    ++lines;
    const bool req = json::parse(line).contains("method");
    const auto again = req ? control::encode(control::decode_request(line)) : control::encode(control::decode_response(line));
    exact += again == line;
  }
  pass = pass && lines > 0 && exact == lines;
  notes += "corpus " + std::to_string(exact) + "/" + std::to_string(lines) + " byte-exact";

  // Atomicity under injected commit failures.
  {
    int n = 0;
    control::ServiceOptions so;
    so.service_policy = scenario::ServicePolicy::kApply;
    so.before_commit = [&](const json&) {
      if (n++ % 3 != 2) throw Error("injected");
    };
    control::NetworkService svc(scenario::load_scenario("0 establish 4\n"), so);
    svc.step();
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> g(8.0, 27.0);
    int failed = 0, intact = 0;
    for (int i = 0; i < 300; ++i) {
      const auto before = fnv1a64(svc.get_config().dump());
      try {
        svc.edit_config({{"gains_db", {g(rng), g(rng), g(rng), g(rng), g(rng), g(rng)}}, {"load", 5 * (i % 7)}});
      } catch (const Error&) {
        ++failed;
        intact += fnv1a64(svc.get_config().dump()) == before;
      }
    }
    pass = pass && failed > 0 && intact == failed;
    notes += "; " + std::to_string(intact) + "/" + std::to_string(failed) + " failed edits left config hash-equal";
  }

  // Determinism.
  const fs::path base = fs::temp_directory_path() / ("adon-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(base);
  std::string qa, qb;
  const auto ta = fingerprint_run(first, base / "a", qa);
  const auto tb = fingerprint_run(canonical_run(7), base / "b", qb);
  fs::remove_all(base);
  pass = pass && ta == tb && qa == qb;
  notes += "; telemetry.csv " + ta + (ta == tb ? " == " : " != ") + tb + ", q_trace.csv " + qa +
           (qa == qb ? " == " : " != ") + qb;

  // Slow consumer: dropped at the backlog bound, producer and others unaffected.
  {
    control::ServiceOptions so;
    so.service_policy = scenario::ServicePolicy::kApply;
    control::NetworkService svc(scenario::load_scenario("0 establish 4\n5000 load 10\n"), so);
    auto slow = svc.subscribe({});
    auto fast = svc.subscribe({});
    int expect = 0;
    bool gap_free = true;
    for (int i = 0; i < 1500; ++i) {
      svc.step();
      while (auto item = fast->pop()) gap_free = gap_free && item->at("tick").get<int>() == expect++;
    }
    int prefix = 0;
    while (auto item = slow->pop()) gap_free = gap_free && item->at("tick").get<int>() == prefix++;
    const bool ok = slow->overflowed() && !fast->overflowed() && expect == 1500 && prefix == 1000 && gap_free;

    // Same over TCP with a client that never reads.
    control::NetworkService wire(scenario::load_scenario("0 establish 4\n20000 load 10\n"), [] {
      control::ServiceOptions o;
      o.service_policy = scenario::ServicePolicy::kApply;
      o.subscriber_backlog = 200;
      return o;
    }());
    control::TcpServer server(wire);
    auto raw = control::LineSocket::connect("127.0.0.1", server.port());
    raw->write_line(control::encode(control::Request{1, "subscribe-telemetry", json::object()}));
    raw->read_line();
    for (int i = 0; i < 12000; ++i) wire.step();
    int got = 0;
    bool tcp_ok = true, overflow = false;
    while (auto l = raw->read_line()) {
      const auto r = control::decode_response(*l);
      if (r.error) {
        overflow = r.error->code == control::kBacklogOverflow;
        break;
      }
      tcp_ok = tcp_ok && r.result->at("telemetry").at("tick").get<int>() == got++;
    }
    tcp_ok = tcp_ok && overflow && wire.tick() == 11999;
    pass = pass && ok && tcp_ok;
    notes += std::string("; slow consumer dropped after ") + std::to_string(prefix) + " records, fast stream " +
             std::to_string(expect) + " gap-free, TCP reader dropped with 429 after " + std::to_string(got) +
             " records while the clock reached tick " + std::to_string(wire.tick());
  }
  return {pass, notes};
}

// ---------------------------------------------------------------- 8

Verdict mode_purity(const runner::RunResult& defaults) {
  auto count = [](const std::map<std::string, std::size_t>& m, const std::string& k) {
    const auto it = m.find(k);
    return it == m.end() ? std::size_t{0} : it->second;
  };
  std::size_t rule_tasks = 0;
  for (const auto& t : defaults.tasks) rule_tasks += t.mode == "RuleCentric";
  const auto rule_calls = count(defaults.backend_calls, "RuleCentric");

  auto native_table = agent::ModeTable::defaults();
  for (const char* kind : {"EstablishBatches", "SetLoad", "QDrop", "LossOfSignal", "DegradationForecast"})
    native_table.set(kind, agent::OperationMode::kLlmNative);
  const auto native = canonical_run(7, native_table);
  std::size_t native_tasks = 0;
  bool native_ok = true;
  for (const auto& t : native.tasks) {
    native_tasks += t.mode == "LlmNative";
    native_ok = native_ok && (t.skipped || t.success);
  }
  const auto native_fetches = count(native.workflow_fetches, "LlmNative");
  const auto native_calls = count(native.backend_calls, "LlmNative");

  const bool pass = rule_tasks > 0 && rule_calls == 0 && native_tasks > 0 && native_fetches == 0 && native_ok;
  return {pass, "RuleCentric: " + std::to_string(rule_tasks) + " tasks, " + std::to_string(rule_calls) +
                    " backend calls; LlmNative: " + std::to_string(native_tasks) + " tasks, " +
                    std::to_string(native_calls) + " backend calls, " + std::to_string(native_fetches) +
                    " workflow fetches" + (native_ok ? "" : ", some tasks failed")};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const std::function<Verdict()>& f) {
    Verdict v;
    try {
      v = f();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << " - " << v.detail << std::endl;
  };

  const auto t0 = std::chrono::steady_clock::now();
  runner::RunResult canonical;
  std::string setup_error;
  try {
    canonical = canonical_run(7);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto need_run = [&](auto f) {
    return [=, &canonical, &setup_error]() -> Verdict {
      if (!setup_error.empty()) return {false, "canonical run failed: " + setup_error};
      return f(canonical);
    };
  };

  report(1, need_run([&](const runner::RunResult& r) { return brute_force_gap(r, wall); }));
  report(2, need_run(dt_improvement));
  report(3, cut_localization);
  report(4, need_run(aging));
  report(5, optimizer_comparison);
  report(6, physics_properties);
  report(7, need_run(systems));
  report(8, need_run(mode_purity));
  return failures;
}
