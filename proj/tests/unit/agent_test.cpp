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


#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "adon/agent/agent.hpp"
#include "adon/agent/failure.hpp"
#include "adon/agent/grammar.hpp"
#include "adon/agent/mode.hpp"
#include "adon/agent/plan.hpp"
#include "adon/agent/react.hpp"
#include "adon/agent/remote_chat.hpp"
#include "adon/agent/retrieval.hpp"
#include "adon/agent/scripted.hpp"
#include "adon/agent/transcript.hpp"
#include "adon/optimizer/search.hpp"
#include "adon/runner/runner.hpp"

namespace adon::agent {
namespace {

// Replays canned replies in order, repeating the last one.
class CannedBackend : public LlmBackend {
 public:
  explicit CannedBackend(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(const Prompt& p) override {
    prompts.push_back(p);
    const auto i = std::min(calls++, replies_.size() - 1);
    return replies_[i];
  }
  std::string name() const override { return "canned"; }

  std::size_t calls = 0;
  std::vector<Prompt> prompts;

 private:
  std::vector<std::string> replies_;
};

physics::ChannelGrid grid_with(int load) {
  physics::ChannelGrid g;
  for (int s = 0; s < load; ++s) {
    g.active[s] = true;
    g.is_real[s] = s % 5 == 0;
  }
  return g;
}

opt::TwinEnvironment sample_env() {
  twin::TwinParameters p;
  p.extra_loss_db = {0.4, 1.0, 0.2, 0.8};
  p.nf_db = {5.2, 5.8, 4.9, 6.0, 5.5, 4.7};
  return {physics::LinkTopology{}, p, grid_with(20)};
}

// Counts evaluations; stands in for the line.
class CountingEnv : public opt::Environment {
 public:
  double evaluate(const GainConfig& c) override {
    ++evaluations;
    return inner.value(c);
  }
  opt::TwinEnvironment inner = sample_env();
  int evaluations = 0;
};

// --- grammar -------------------------------------------------------------

TEST(Grammar, ThoughtsAttachToTheNextAction) {
  const auto actions = parse_actions(
      "THOUGHT: first\nTHOUGHT: still first\n\nACTION: retrieve_docs query=\"fiber cut\"\nACTION: localize_failure\n");
  ASSERT_EQ(actions.size(), 2u);
  EXPECT_EQ(actions[0].name, "retrieve_docs");
  EXPECT_EQ(actions[0].thought, "first still first");
  EXPECT_EQ(parse_kv(actions[0].args).at("query"), "fiber cut");
  EXPECT_EQ(actions[1].name, "localize_failure");
  EXPECT_TRUE(actions[1].args.empty());
  EXPECT_TRUE(actions[1].thought.empty());
}

TEST(Grammar, RejectsFreeText) {
  EXPECT_THROW(parse_actions("Sure! Here is my plan:\nACTION: finish"), MalformedAction);
  EXPECT_THROW(parse_actions("ACTION: Finish"), MalformedAction);
  EXPECT_THROW(parse_actions("ACTION:"), MalformedAction);
  EXPECT_THROW(parse_actions("ACTION: set_gains(1,2)"), MalformedAction);
}

TEST(Grammar, SingleActionMeansExactlyOne) {
  EXPECT_EQ(parse_single_action("THOUGHT: x\nACTION: finish").name, "finish");
  EXPECT_THROW(parse_single_action("THOUGHT: only thinking"), MalformedAction);
  EXPECT_THROW(parse_single_action("ACTION: finish\nACTION: finish"), MalformedAction);
}

TEST(Grammar, KeyValueArguments) {
  const auto kv = parse_kv("span=2 kind=Aging note=\"two words\"");
  EXPECT_EQ(kv.at("span"), "2");
  EXPECT_EQ(kv.at("kind"), "Aging");
  EXPECT_EQ(kv.at("note"), "two words");
  EXPECT_THROW(parse_kv("span"), MalformedAction);
  EXPECT_THROW(parse_kv("a=1 a=2"), MalformedAction);
  EXPECT_THROW(parse_kv("q=\"open"), MalformedAction);
}

TEST(Grammar, SixValues) {
  const auto v = parse_six("18,18.5,19,19.5,20,20.5");
  EXPECT_EQ(v[5], 20.5);
  EXPECT_EQ(format_six(v), "18,18.5,19,19.5,20,20.5");
  EXPECT_THROW(parse_six("1,2,3,4,5"), MalformedAction);
  EXPECT_THROW(parse_six("1,2,3,4,5,6,7"), MalformedAction);
  EXPECT_THROW(parse_six("1,2,3,4,5,x"), MalformedAction);
}

// --- mode selection --------------------------------------------------------

TEST(Mode, DefaultTable) {
  const auto t = ModeTable::defaults();
  EXPECT_EQ(t.lookup("SetLoad"), OperationMode::kRuleCentric);
  EXPECT_EQ(t.lookup("EstablishBatches"), OperationMode::kRuleCentric);
  EXPECT_EQ(t.lookup("QDrop"), OperationMode::kLlmCentric);
  EXPECT_EQ(t.lookup("LossOfSignal"), OperationMode::kLlmCentric);
  EXPECT_EQ(t.lookup("DegradationForecast"), OperationMode::kLlmCentric);
}

TEST(Mode, UnknownKindIsAnError) {
  EXPECT_THROW(ModeTable::defaults().lookup("Earthquake"), UnknownEventKind);
  EXPECT_THROW(allowed_modes("Earthquake"), UnknownEventKind);
}

TEST(Mode, OverridesAreValidated) {
  const auto t = ModeTable::from_json({{"SetLoad", "LlmNative"}});
  EXPECT_EQ(t.lookup("SetLoad"), OperationMode::kLlmNative);
  EXPECT_EQ(t.lookup("EstablishBatches"), OperationMode::kRuleCentric);
  EXPECT_THROW(ModeTable::from_json({{"LossOfSignal", "RuleCentric"}}), ValidationError);
  EXPECT_THROW(ModeTable::from_json({{"SetLoad", "Autopilot"}}), ValidationError);
}

// --- retrieval -------------------------------------------------------------

DocumentStore shipped_docs() { return DocumentStore::load_directory(std::string(ADON_DATA_DIR) + "/docs"); }

TEST(Retrieval, MatchesReferenceScores) {
  std::ifstream in(std::string(ADON_TEST_DATA_DIR) + "/golden_retrieval.json");
  const auto golden = nlohmann::json::parse(in);
  const auto store = shipped_docs();
  for (const auto& [query, expected] : golden.items()) {
    const auto hits = store.retrieve(query, 10);
    ASSERT_EQ(hits.size(), expected.size()) << query;
    for (std::size_t i = 0; i < hits.size(); ++i) {
      EXPECT_EQ(hits[i].doc_id, expected[i]["doc"].get<std::string>()) << query;
      EXPECT_NEAR(hits[i].score, expected[i]["score"].get<double>(), 1e-12) << query;
    }
  }
}

TEST(Retrieval, DatasheetRanksFirst) {
  const auto hits = shipped_docs().retrieve("fiber attenuation datasheet");
  ASSERT_FALSE(hits.empty());
  EXPECT_EQ(hits.front().doc_id, "fiber_datasheet");
  EXPECT_EQ(hits.size(), 3u);
}

TEST(Retrieval, LargeKReturnsEverythingThatMatches) {
  const auto store = shipped_docs();
  EXPECT_EQ(store.retrieve("the", 100).size(), store.size());
}

TEST(Retrieval, NoOverlapIsEmpty) {
  EXPECT_TRUE(shipped_docs().retrieve("quantum entanglement").empty());
}

TEST(Retrieval, EmptyStoreThrows) {
  DocumentStore s;
  EXPECT_THROW(s.retrieve("fiber"), EmptyStore);
}

TEST(Retrieval, ScoresNonIncreasingAndTiesById) {
  DocumentStore s;
  s.add({"b", "b", "red fiber"});
  s.add({"a", "a", "red fiber"});
  s.add({"c", "c", "red red fiber amplifier"});
  const auto hits = s.retrieve("red fiber", 5);
  ASSERT_EQ(hits.size(), 3u);
  for (std::size_t i = 1; i < hits.size(); ++i) EXPECT_GE(hits[i - 1].score, hits[i].score);
  EXPECT_EQ(hits[0].score, hits[1].score);
  EXPECT_EQ(hits[0].doc_id, "a");
  EXPECT_EQ(hits[1].doc_id, "b");
}

// --- plans -----------------------------------------------------------------

ToolRegistry noop_tools(std::vector<std::string>* calls = nullptr) {
  ToolRegistry r;
  for (const char* name : {"retrieve_docs", "localize_failure", "generate_recovery", "optimize_power",
                           "sync_twin", "set_load", "react_optimize", "probe_gains", "fit_twin"}) {
    std::vector<std::string> required;
    if (std::string(name) == "retrieve_docs") required = {"query"};
    if (std::string(name) == "set_load") required = {"target"};
    r.add({name, required, {"max_iters", "k", "ticks", "hold"}, [calls, name](const PlanStep&) {
             if (calls) calls->push_back(name);
             return ToolResult{std::string(name) + " ok", {}, {}};
           }});
  }
  return r;
}

TEST(Plan, ScriptedFailurePlanHasFiveSteps) {
  ScriptedPolicy policy;
  const auto tools = noop_tools();
  const auto plan = request_plan([&](const Prompt& p) { return policy.complete(p); },
                                 {"plan", "", {{"workflow", "failure"}, {"alarm", {{"kind", "LossOfSignal"}}}}, {}},
                                 tools);
  std::vector<std::string> names;
  for (const auto& s : plan.steps) names.push_back(s.tool);
  EXPECT_EQ(names, (std::vector<std::string>{"retrieve_docs", "localize_failure", "generate_recovery",
                                             "optimize_power", "sync_twin"}));
  EXPECT_EQ(plan.source, "backend");
  EXPECT_FALSE(plan.raw.empty());
  EXPECT_FALSE(plan.steps.front().rationale.empty());
}

TEST(Plan, RuleCentricWorkflowIsStoredVerbatim) {
  auto store = WorkflowStore::defaults();
  const auto plan = store.fetch("add_drop", {{"target", "25"}});
  std::vector<std::string> names;
  for (const auto& s : plan.steps) names.push_back(s.tool);
  EXPECT_EQ(names, (std::vector<std::string>{"set_load", "probe_gains", "fit_twin", "optimize_power", "sync_twin"}));
  EXPECT_EQ(plan.steps[0].args.at("target"), "25");
  EXPECT_EQ(plan.source, "workflow:add_drop");
  EXPECT_EQ(store.fetch_count(), 1u);
  EXPECT_THROW(store.fetch("add_drop", {}), ValidationError);
  EXPECT_THROW(store.fetch("teleport", {}), PlanRejected);
}

TEST(Plan, UnknownToolTwiceIsRejectedWithRawText) {
  CannedBackend backend({"ACTION: launch_rocket"});
  const auto tools = noop_tools();
  try {
    request_plan([&](const Prompt& p) { return backend.complete(p); }, {"plan", "", {}, {}}, tools);
    FAIL() << "expected PlanRejected";
  } catch (const PlanRejected& e) {
    EXPECT_EQ(e.raw(), "ACTION: launch_rocket");
  }
  EXPECT_EQ(backend.calls, 2u);
  EXPECT_TRUE(backend.prompts[1].payload.contains("rejected"));
}

TEST(Plan, OneRepromptCanFixAPlan) {
  CannedBackend backend({"ACTION: launch_rocket", "ACTION: sync_twin"});
  const auto plan =
      request_plan([&](const Prompt& p) { return backend.complete(p); }, {"plan", "", {}, {}}, noop_tools());
  ASSERT_EQ(plan.steps.size(), 1u);
  EXPECT_EQ(plan.steps[0].tool, "sync_twin");
}

TEST(Plan, MissingArgumentAndOverlongPlansAreInvalid) {
  const auto tools = noop_tools();
  EXPECT_THROW(plan_from_text("ACTION: set_load", tools), ValidationError);
  EXPECT_THROW(plan_from_text("ACTION: sync_twin bogus=1", tools), ValidationError);
  std::string long_plan;
  for (int i = 0; i < 51; ++i) long_plan += "ACTION: sync_twin\n";
  EXPECT_THROW(plan_from_text(long_plan, tools), ValidationError);
}

// --- execution -------------------------------------------------------------

TEST(Execute, EmptyPlanIsAnEmptySuccess) {
  Transcript t;
  execute_plan(Plan{}, noop_tools(), t, {});
  EXPECT_TRUE(t.entries.empty());
}

TEST(Execute, StepsRunInOrderWithOneObservationEach) {
  std::vector<std::string> calls;
  auto tools = noop_tools(&calls);
  auto store = WorkflowStore::defaults();
  Transcript t;
  execute_plan(store.fetch("add_drop", {{"target", "20"}}), tools, t, {});
  EXPECT_EQ(calls, (std::vector<std::string>{"set_load", "probe_gains", "fit_twin", "optimize_power", "sync_twin"}));
  EXPECT_EQ(t.action_count(), 5u);
  EXPECT_TRUE(t.well_formed());
  int phase = 0;
  for (const auto& e : t.entries)
    if (e.kind == EntryKind::kAction) EXPECT_EQ(e.phase, ++phase);
}

TEST(Execute, FollowUpStepsRunNextInTheSamePhase) {
  std::vector<std::string> calls;
  auto tools = noop_tools(&calls);
  tools.add({"generate_recovery", {}, {}, [&](const PlanStep&) {
               calls.push_back("generate_recovery");
               return ToolResult{"ok", {}, {{"probe_gains", {}, ""}, {"fit_twin", {}, ""}}};
             }});
  Plan plan;
  plan.steps = {{"generate_recovery", {}, ""}, {"optimize_power", {}, ""}};
  Transcript t;
  execute_plan(plan, tools, t, {});
  EXPECT_EQ(calls, (std::vector<std::string>{"generate_recovery", "probe_gains", "fit_twin", "optimize_power"}));
  std::vector<int> phases;
  for (const auto& e : t.entries)
    if (e.kind == EntryKind::kAction) phases.push_back(e.phase);
  EXPECT_EQ(phases, (std::vector<int>{1, 1, 1, 2}));
}

TEST(Execute, RepairStepRunsBeforeTheRetry) {
  std::vector<std::string> calls;
  auto tools = noop_tools(&calls);
  bool dark = true;
  tools.add({"optimize_power", {}, {}, [&](const PlanStep&) {
               calls.push_back("optimize_power");
               if (dark) throw CutLinkError("span 1 is dark");
               return ToolResult{"ok", {}, {}};
             }});
  tools.add({"wait_for_repair", {"span"}, {}, [&](const PlanStep&) {
               calls.push_back("wait_for_repair");
               dark = false;
               return ToolResult{"lit", {}, {}};
             }});
  ExecutionContext ctx;
  ctx.repair = [](const PlanStep&, const std::exception& e) -> std::optional<PlanStep> {
    EXPECT_EQ(error_type(e), "CutLink");
    return PlanStep{"wait_for_repair", {{"span", "1"}}, ""};
  };
  Plan plan;
  plan.steps = {{"optimize_power", {}, ""}, {"sync_twin", {}, ""}};
  Transcript t;
  execute_plan(plan, tools, t, ctx);
  EXPECT_EQ(calls, (std::vector<std::string>{"optimize_power", "wait_for_repair", "optimize_power", "sync_twin"}));
  EXPECT_TRUE(t.well_formed());
}

TEST(Execute, AbortsAfterTwoRepairs) {
  auto tools = noop_tools();
  tools.add({"optimize_power", {}, {}, [](const PlanStep&) -> ToolResult { throw CutLinkError("dark"); }});
  int repairs = 0;
  ExecutionContext ctx;
  ctx.repair = [&](const PlanStep&, const std::exception&) -> std::optional<PlanStep> {
    ++repairs;
    return PlanStep{"sync_twin", {}, ""};
  };
  Plan plan;
  plan.steps = {{"optimize_power", {}, ""}};
  Transcript t;
  try {
    execute_plan(plan, tools, t, ctx);
    FAIL() << "expected ExecutionAborted";
  } catch (const ExecutionAborted& e) {
    EXPECT_EQ(repairs, 2);
    EXPECT_EQ(e.partial().action_count(), 5u);  // 3 attempts + 2 repairs
    EXPECT_TRUE(e.partial().well_formed());
    EXPECT_EQ(e.partial().entries.back().kind, EntryKind::kOutcome);
  }
}

// --- react loop ------------------------------------------------------------

void expect_same_trace(const opt::OptimizerReport& a, const opt::OptimizerReport& b) {
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].config, b.trace[i].config) << i;
    EXPECT_EQ(a.trace[i].value, b.trace[i].value) << i;
  }
  EXPECT_EQ(a.best_config, b.best_config);
  EXPECT_EQ(a.best_value, b.best_value);
}

TEST(React, ScriptedPolicyReproducesCoordinateAscent) {
  for (bool tilts : {false, true}) {
    auto env = sample_env();
    ReactOptions o;
    o.max_iters = 10000;
    o.schedule.include_tilts = tilts;
    ScriptedPolicy policy;
    const auto init = GainConfig::flat(18.0);
    const auto ca = opt::coordinate_ascent(env, init, o.schedule);
    Transcript t;
    const auto re = react_optimize(env, policy, init, o, &t);
    expect_same_trace(ca, re);
    EXPECT_EQ(re.method, "react");
    EXPECT_TRUE(t.well_formed());
    EXPECT_EQ(t.action_count(), re.trace.size());  // every set_gains plus the final finish
  }
}

TEST(React, IterationLimitTruncatesTheSameTrace) {
  auto env = sample_env();
  ReactOptions o;
  o.max_iters = 20;
  ScriptedPolicy policy;
  const auto init = GainConfig::flat(18.0);
  const auto ca = opt::coordinate_ascent(env, init, o.schedule);
  const auto re = react_optimize(env, policy, init, o);
  ASSERT_EQ(re.trace.size(), 21u);
  for (std::size_t i = 0; i < re.trace.size(); ++i) EXPECT_EQ(re.trace[i].config, ca.trace[i].config);
}

TEST(React, FinishImmediatelyReturnsInitialConfig) {
  CountingEnv env;
  CannedBackend backend({"ACTION: finish"});
  const auto init = GainConfig::flat(17.0);
  const auto r = react_optimize(env, backend, init);
  EXPECT_EQ(r.best_config, init);
  EXPECT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(env.evaluations, 1);
}

TEST(React, OutOfBoundsIsReportedAndNotApplied) {
  CountingEnv env;
  CannedBackend backend({"ACTION: set_gains 26,18,18,18,18,18", "ACTION: finish"});
  Transcript t;
  const auto r = react_optimize(env, backend, GainConfig::flat(18.0), {}, &t);
  EXPECT_EQ(env.evaluations, 1);
  EXPECT_EQ(r.trace.size(), 1u);
  ASSERT_TRUE(backend.prompts[1].payload.contains("last_error"));
  EXPECT_NE(backend.prompts[1].payload["last_error"].get<std::string>().find("bound violation"), std::string::npos);
  bool reported = false;
  for (const auto& e : t.entries)
    reported |= e.kind == EntryKind::kObservation && e.text.find("not applied") != std::string::npos;
  EXPECT_TRUE(reported);
}

TEST(React, ThreeMalformedRepliesAbort) {
  CountingEnv env;
  CannedBackend backend({"I think gains should go up."});
  EXPECT_THROW(react_optimize(env, backend, GainConfig::flat(18.0)), MalformedAction);
  EXPECT_EQ(backend.calls, 3u);
  EXPECT_EQ(env.evaluations, 1);
}

TEST(React, MalformedStrikesResetOnAValidReply) {
  CountingEnv env;
  CannedBackend backend({"junk", "junk", "ACTION: set_gains 18,18,18,18,18,19", "junk", "junk", "ACTION: finish"});
  const auto r = react_optimize(env, backend, GainConfig::flat(18.0));
  EXPECT_EQ(r.trace.size(), 2u);
}

TEST(React, RandomGarbageNeverTouchesTheEnvironment) {
  std::mt19937_64 rng(99);
  const std::string alphabet = "ACTION: set_gains finish,0123456789.-=\n THOUGHT";
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> replies;
    for (int k = 0; k < 3; ++k) {
      std::string s;
      const int len = static_cast<int>(rng() % 40);
      for (int i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
      // Keep only replies the grammar refuses.
      bool valid = false;
      try {
        const auto a = parse_single_action(s);
        valid = a.name == "finish" ? a.args.empty() : a.name == "set_gains";
        if (a.name == "set_gains") (void)parse_set_gains(a.args, GainConfig::flat(18.0));
      } catch (const MalformedAction&) {
        valid = false;
      }
      replies.push_back(valid ? "nonsense" : s);
    }
    CountingEnv env;
    CannedBackend backend(replies);
    EXPECT_THROW(react_optimize(env, backend, GainConfig::flat(18.0)), MalformedAction);
    EXPECT_EQ(env.evaluations, 1) << trial;
  }
}

// --- localization and recovery --------------------------------------------

TEST(Recovery, AgingRaisesTheDownstreamGain) {
  const auto steps = generate_recovery({2, FailureKind::kAging}, GainConfig::flat(18.0), 6.0);
  ASSERT_FALSE(steps.empty());
  EXPECT_EQ(steps[0].tool, "set_gain");
  EXPECT_EQ(steps[0].args.at("amp"), "3");
  EXPECT_EQ(steps[0].args.at("gain"), "24");
}

TEST(Recovery, AgingGainIsClampedToTheAmplifierRange) {
  const auto steps = generate_recovery({1, FailureKind::kAging}, GainConfig::flat(22.0), 6.0);
  EXPECT_EQ(steps[0].args.at("gain"), "25");
}

TEST(Recovery, CutWaitsForRepairFirst) {
  const auto steps = generate_recovery({0, FailureKind::kCut}, GainConfig::flat(18.0), 0.0);
  ASSERT_FALSE(steps.empty());
  EXPECT_EQ(steps[0].tool, "wait_for_repair");
  EXPECT_EQ(steps[0].args.at("span"), "0");
  for (const auto& s : steps) EXPECT_NE(s.tool, "set_gain");
}

// Evidence bundle as the agent builds it, from a plant we control.
nlohmann::json evidence(scenario::NetworkState& st, std::uint64_t seed) {
  telemetry::TelemetrySampler sampler(seed);
  nlohmann::json tele = nlohmann::json::array();
  for (int i = 0; i < 20; ++i) {
    const auto r = sampler.sample(st);
    tele.push_back({{"tick", i}, {"amp_in_dbm", r.amp_in_dbm}, {"amp_out_dbm", r.amp_out_dbm},
                    {"osc_alive", r.osc_alive}});
  }
  nlohmann::json spans = nlohmann::json::array();
  for (std::size_t s = 0; s < kSpanCount; ++s)
    spans.push_back({{"id", s}, {"length_km", st.nominal().spans[s].length_km},
                     {"attenuation_db_per_km", st.nominal().spans[s].attenuation_db_per_km}});
  nlohmann::json chunks = nlohmann::json::array();
  for (const auto& c : shipped_docs().retrieve("fiber attenuation datasheet"))
    chunks.push_back({{"doc_id", c.doc_id}, {"text", c.text}});
  return {{"telemetry", tele}, {"alarms", nlohmann::json::array()}, {"logs", nlohmann::json::array()},
          {"chunks", chunks}, {"spans", spans}};
}

scenario::NetworkState lit_state(std::uint64_t seed) {
  scenario::NetworkState st(seed);
  scenario::apply_wavelength_change(st, 20);
  return st;
}

Localization scripted_localize(const nlohmann::json& ev) {
  ScriptedPolicy p;
  return parse_localization(parse_single_action(p.complete({"localize", "", ev, {"report_failure"}})));
}

TEST(Localize, CutOnSpanZero) {
  auto st = lit_state(7);
  st.set_cut(0, true);
  EXPECT_EQ(scripted_localize(evidence(st, 1)), (Localization{0, FailureKind::kCut}));
}

TEST(Localize, SixDbAgingOnSpanTwo) {
  auto st = lit_state(7);
  st.add_ramp({2, 6.0, 6.0, 0.0});
  st.advance_ramps();
  st.set_config([&] {
    GainConfig c = st.config();
    c.gains_db[3] = 24.0;
    return c;
  }());
  EXPECT_EQ(scripted_localize(evidence(st, 2)), (Localization{2, FailureKind::kAging}));
}

TEST(Localize, HealthyLineFails) {
  auto st = lit_state(7);
  EXPECT_THROW(scripted_localize(evidence(st, 3)), LocalizationFailed);
}

TEST(Localize, CutClaimWithoutLossOfSignalIsContradicted) {
  telemetry::TelemetryRecord r;
  r.osc_alive = {true, true, true, true};
  EXPECT_TRUE(contradiction({1, FailureKind::kCut}, r, {}).has_value());
  EXPECT_FALSE(contradiction({1, FailureKind::kCut}, r, {1}).has_value());
  r.osc_alive[1] = false;
  EXPECT_FALSE(contradiction({1, FailureKind::kCut}, r, {}).has_value());
  EXPECT_TRUE(contradiction({1, FailureKind::kAging}, r, {}).has_value());
}

TEST(Localize, ScriptedSoundnessOverSeeds) {
  std::mt19937_64 rng(2024);
  for (int run = 0; run < 20; ++run) {
    const auto seed = rng();
    const int span = static_cast<int>(rng() % kSpanCount);
    auto cut = lit_state(seed);
    cut.set_cut(static_cast<std::size_t>(span), true);
    EXPECT_EQ(scripted_localize(evidence(cut, seed + 1)), (Localization{span, FailureKind::kCut})) << seed;
    auto aged = lit_state(seed);
    aged.add_ramp({span, 2.2, 2.2, 0.0});
    aged.advance_ramps();
    EXPECT_EQ(scripted_localize(evidence(aged, seed + 2)), (Localization{span, FailureKind::kAging})) << seed;
  }
}

// --- end to end ------------------------------------------------------------

runner::RunOptions quick_options() {
  runner::RunOptions o;
  o.brute_force_check = false;
  o.dt_test_ticks.clear();
  o.truth_q_ticks.clear();
  return o;
}

TEST(EndToEnd, CutIncidentTranscript) {
  ScriptedPolicy policy;
  const auto sc = scenario::load_scenario("0 establish 4\n150 cut 0\n260 repair 0\n", "cut");
  const auto r = runner::run(sc, quick_options(), &policy);
  const Transcript* incident = nullptr;
  for (const auto& t : r.transcripts)
    if (t.task_kind == "LossOfSignal") incident = &t;
  ASSERT_NE(incident, nullptr);
  EXPECT_EQ(incident->mode, OperationMode::kLlmCentric);
  std::vector<std::string> tools;
  for (const auto& e : incident->entries)
    if (e.kind == EntryKind::kAction) tools.push_back(e.text.substr(0, e.text.find(' ')));
  EXPECT_EQ(tools, (std::vector<std::string>{"retrieve_docs", "localize_failure", "generate_recovery",
                                             "wait_for_repair", "probe_gains", "fit_twin", "optimize_power",
                                             "sync_twin"}));
  EXPECT_TRUE(incident->well_formed());
  ASSERT_EQ(incident->entries.back().kind, EntryKind::kOutcome);
  EXPECT_TRUE(incident->entries.back().payload["success"].get<bool>());
  ASSERT_EQ(r.incidents.size(), 1u);
  EXPECT_EQ(r.incidents[0].localization, (Localization{0, FailureKind::kCut}));
  EXPECT_GE(r.incidents[0].done_tick, 260);

  // No configuration change between the cut and the repair.
  for (const auto& e : r.logs)
    if (e.source == "agent") EXPECT_TRUE(e.tick < 150 || e.tick >= 260) << e.text;
  // The LOS alarm is logged before the first agent action of the incident.
  int los_seq = -1, first_action_seq = -1;
  for (const auto& e : r.logs) {
    if (e.source == "analytics" && e.text.rfind("LossOfSignal", 0) == 0 && los_seq < 0) los_seq = static_cast<int>(e.seq);
    if (e.source == "agent" && e.tick >= 150 && first_action_seq < 0) first_action_seq = static_cast<int>(e.seq);
  }
  ASSERT_GE(los_seq, 0);
  EXPECT_LT(los_seq, first_action_seq);
}

TEST(EndToEnd, CutDuringOptimizationDefersUntilRepair) {
  // Cut lands while the add/drop workflow is probing; the optimize step
  // hits the dark line and the rule table waits for the splice.
  const auto sc = scenario::load_scenario("0 establish 4\n35 cut 1\n120 repair 1\n", "midcut");
  const auto r = runner::run(sc, quick_options(), nullptr);
  ASSERT_FALSE(r.transcripts.empty());
  const auto& t = r.transcripts.front();
  EXPECT_EQ(t.mode, OperationMode::kRuleCentric);
  std::vector<std::string> tools;
  for (const auto& e : t.entries)
    if (e.kind == EntryKind::kAction) tools.push_back(e.text.substr(0, e.text.find(' ')));
  const auto wait = std::find(tools.begin(), tools.end(), "wait_for_repair");
  ASSERT_NE(wait, tools.end());
  EXPECT_EQ(*(wait - 1), "optimize_power");
  EXPECT_EQ(*(wait + 1), "optimize_power");
  EXPECT_TRUE(t.entries.back().payload["success"].get<bool>());
  EXPECT_GE(t.entries.back().tick, 120);
  EXPECT_EQ(r.backend_calls.count("RuleCentric"), 0u);
}

TEST(EndToEnd, LocalizationSoundnessOverGeneratedScenarios) {
  std::mt19937_64 rng(31337);
  ScriptedPolicy policy;
  for (int run = 0; run < 20; ++run) {
    const auto seed = rng();
    const int span = static_cast<int>(rng() % kSpanCount);
    auto o = quick_options();
    o.seed = seed;
    const auto cut = scenario::load_scenario(
        "0 establish 4\n150 cut " + std::to_string(span) + "\n260 repair " + std::to_string(span) + "\n", "cut");
    const auto rc = runner::run(cut, o, &policy);
    ASSERT_FALSE(rc.incidents.empty()) << seed;
    EXPECT_EQ(rc.incidents[0].localization, (Localization{span, FailureKind::kCut})) << seed;

    const auto aging = scenario::load_scenario(
        "0 establish 4\n150 aging " + std::to_string(span) + " 0.06 2.4\n", "aging");
    const auto ra = runner::run(aging, o, &policy);
    ASSERT_FALSE(ra.incidents.empty()) << seed << " span " << span;
    EXPECT_EQ(ra.incidents[0].localization, (Localization{span, FailureKind::kAging})) << seed << " span " << span;
  }
}

TEST(EndToEnd, BackendModeSelectionIsValidated) {
  CannedBackend backend({"ACTION: select_mode mode=LlmCentric"});
  // Device is never touched by select_mode.
  struct NullDevice : Device {
    int tick() override { return 0; }
    nlohmann::json get_config() override { return {}; }
    nlohmann::json edit_config(const nlohmann::json&) override { return {}; }
    std::vector<telemetry::TelemetryRecord> telemetry_since(int) override { return {}; }
    std::vector<control::LogEntry> get_logs(int, int) override { return {}; }
    void advance(int) override {}
  } device;
  AgentOptions o;
  o.backend_selects_mode = true;
  Agent a(device, {}, shipped_docs(), &backend, o);
  EXPECT_EQ(a.select_mode("SetLoad"), OperationMode::kLlmCentric);
  CannedBackend bad({"ACTION: select_mode mode=RuleCentric"});
  Agent b(device, {}, shipped_docs(), &bad, o);
  EXPECT_EQ(b.select_mode("LossOfSignal"), OperationMode::kLlmCentric);  // falls back to the table
  EXPECT_EQ(b.backend_calls().at("selection"), 1u);
  EXPECT_THROW(b.select_mode("Earthquake"), UnknownEventKind);
}

// --- transcripts -----------------------------------------------------------

Transcript sample_transcript() {
  Transcript t;
  t.task_id = "task-1";
  t.task_kind = "LossOfSignal";
  t.mode = OperationMode::kLlmCentric;
  t.thought(300, 1, "read the playbook", "THOUGHT: read the playbook\nACTION: retrieve_docs query=\"x\"");
  t.action(300, 1, "retrieve_docs query=x", {{"query", "x"}});
  t.observation(300, 1, "retrieved failure_playbook");
  t.action(300, 2, "localize_failure", nlohmann::json::object());
  t.observation(300, 2, "span 0 Cut", {{"span", 0}});
  t.outcome(545, "completed 2 actions", true);
  return t;
}

TEST(Transcript, JsonLinesRoundTrip) {
  std::stringstream ss;
  write_jsonl(ss, sample_transcript());
  const auto back = read_transcripts(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], sample_transcript());
}

TEST(Transcript, TruncatedFileNamesTheOffset) {
  std::stringstream ss;
  write_jsonl(ss, sample_transcript());
  std::string text = ss.str();
  const auto cut_at = text.size() - 10;
  const auto line_start = text.rfind('\n', cut_at) + 1;
  std::istringstream in(text.substr(0, cut_at));
  try {
    read_transcripts(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), line_start);
  }
}

TEST(Transcript, ReportListsPhasesInOrder) {
  const auto text = render_report({sample_transcript()});
  EXPECT_LT(text.find("(1) retrieve_docs"), text.find("(2) localize_failure"));
  EXPECT_NE(text.find("outcome: completed"), std::string::npos);
  EXPECT_EQ(render_report({}), "");
}

// --- remote backend --------------------------------------------------------

TEST(RemoteChat, PostsPromptAndReturnsReplyVerbatim) {
  httplib::Server server;
  nlohmann::json seen;
  std::string auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(nlohmann::json{{"choices", {{{"message", {{"content", "ACTION: finish"}}}}}}}.dump(),
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("ADON_TEST_KEY", "sekret", 1);
  RemoteChatConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.model = "mock-1";
  cfg.api_key_env = "ADON_TEST_KEY";
  RemoteChat chat(cfg);
  const auto reply = chat.complete({"react", "history here", {{"k", 1}}, {"set_gains", "finish"}});
  server.stop();
  th.join();

  EXPECT_EQ(reply, "ACTION: finish");
  EXPECT_EQ(seen["model"], "mock-1");
  EXPECT_EQ(auth, "Bearer sekret");
  const auto content = seen["messages"][1]["content"].get<std::string>();
  EXPECT_NE(content.find("TASK: react"), std::string::npos);
  EXPECT_NE(content.find("set_gains finish"), std::string::npos);
}

TEST(RemoteChat, HttpErrorsSurface) {
  httplib::Server server;
  server.Post("/chat", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("boom", "text/plain");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  RemoteChat chat({"http://127.0.0.1:" + std::to_string(port) + "/chat", "m", "UNSET_KEY_VAR", 5});
  EXPECT_THROW(chat.complete({"plan", "", {}, {}}), BackendError);
  server.stop();
  th.join();
}

TEST(RemoteChat, RejectsUnsupportedEndpoints) {
  EXPECT_THROW(RemoteChat({"https://api.example.com/v1/chat", "m", "K", 5}), ValidationError);
  EXPECT_THROW(RemoteChat({"not a url", "m", "K", 5}), ValidationError);
}

}  // namespace
}  // namespace adon::agent
