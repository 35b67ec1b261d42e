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

#ifndef ADON_AGENT_REACT_HPP_
#define ADON_AGENT_REACT_HPP_

#include <string>

#include <nlohmann/json.hpp>

#include "adon/agent/backend.hpp"
#include "adon/agent/grammar.hpp"
#include "adon/agent/scripted.hpp"
#include "adon/agent/transcript.hpp"
#include "adon/optimizer/environment.hpp"
#include "adon/optimizer/search.hpp"

namespace adon::agent {

struct ReactOptions {
  int max_iters = 20;    // set_gains actions, accepted or rejected
  int max_strikes = 3;   // consecutive malformed replies before giving up
  opt::CoordinateAscentOptions schedule;  // advertised to the backend
};

// `ACTION: set_gains g0,...,g5 [tilts=t0,...,t5]`; tilts default to the
// current configuration's.
inline GainConfig parse_set_gains(const std::string& args, const GainConfig& current) {
  const auto sp = args.find(' ');
  GainConfig c = current;
  c.gains_db = parse_six(args.substr(0, sp));
  if (sp != std::string::npos) {
    const auto kv = parse_kv(args.substr(sp + 1));
    for (const auto& [k, v] : kv) {
      if (k != "tilts") throw MalformedAction("unknown set_gains argument '" + k + "'");
      c.tilts_db = parse_six(v);
    }
  }
  return c;
}

// Model-in-the-loop optimization: each turn the backend sees every evaluated
// (config, min-Q) pair and the bounds and answers with one action.
inline opt::OptimizerReport react_optimize(opt::Environment& env, LlmBackend& backend, const GainConfig& init,
                                           const ReactOptions& o = {}, Transcript* transcript = nullptr,
                                           int phase = 0) {
  init.validate();
  opt::Recorder rec(env, "react");
  nlohmann::json history = nlohmann::json::array();
  std::string context;
  auto record = [&](const GainConfig& c) {
    const double v = rec(c);
    history.push_back({{"gains_db", c.gains_db}, {"tilts_db", c.tilts_db}, {"value", v}});
    context += c.to_string() + " -> min-Q " + format_double(v) + " dB\n";
    return v;
  };
  record(init);
  GainConfig current = init;

  int strikes = 0;
  std::string last_error;
  for (int iter = 0; iter < o.max_iters;) {
    Prompt p{"react", context,
             {{"history", history},
              {"bounds", {{"gain_db", {o.schedule.gain_min_db, o.schedule.gain_max_db}},
                          {"tilt_db", {kMinTiltDb, kMaxTiltDb}}}},
              {"schedule", to_json(o.schedule)}},
             {"set_gains", "finish"}};
    if (!last_error.empty()) p.payload["last_error"] = last_error;
    const std::string raw = backend.complete(p);
    const int tick = env.tick();
    Action a;
    try {
      a = parse_single_action(raw);
      if (a.name != "set_gains" && a.name != "finish") throw MalformedAction("unknown action '" + a.name + "'");
      if (a.name == "finish" && !a.args.empty()) throw MalformedAction("finish takes no arguments");
      if (a.name == "set_gains") (void)parse_set_gains(a.args, current);
    } catch (const MalformedAction& e) {
      if (transcript) transcript->thought(tick, phase, std::string("malformed reply: ") + e.what(), raw);
      if (++strikes >= o.max_strikes)
        throw MalformedAction("backend gave " + std::to_string(strikes) + " malformed replies; last: " + e.what());
      last_error = e.what();
      continue;
    }
    strikes = 0;
    last_error.clear();
    if (transcript && !a.thought.empty()) transcript->thought(tick, phase, a.thought, raw);
    if (a.name == "finish") {
      if (transcript) {
        transcript->action(tick, phase, a.line, nlohmann::json::object(), raw);
        transcript->observation(tick, phase, "finished after " + std::to_string(iter) + " iterations");
      }
      break;
    }
    ++iter;
    const GainConfig cand = parse_set_gains(a.args, current);
    if (transcript) transcript->action(tick, phase, a.line, {{"gains_db", cand.gains_db}, {"tilts_db", cand.tilts_db}}, raw);
    const bool in_box = cand.in_bounds() &&
                        std::all_of(cand.gains_db.begin(), cand.gains_db.end(), [&](double g) {
                          return g >= o.schedule.gain_min_db && g <= o.schedule.gain_max_db;
                        });
    if (!in_box) {
      last_error = "bound violation: " + cand.to_string() + " outside gain [" +
                   format_double(o.schedule.gain_min_db) + ", " + format_double(o.schedule.gain_max_db) +
                   "] dB or tilt [-3, 3] dB; not applied";
      if (transcript) transcript->observation(tick, phase, last_error, {{"applied", false}});
      continue;
    }
    const double v = record(cand);
    current = cand;
    if (transcript)
      transcript->observation(env.tick(), phase, "min-Q " + format_double(v) + " dB", {{"applied", true}, {"value", v}});
  }
  return rec.finish();
}

}  // namespace adon::agent

#endif  // ADON_AGENT_REACT_HPP_
