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


#ifndef ADON_RUNNER_EXPERIMENTS_HPP_
#define ADON_RUNNER_EXPERIMENTS_HPP_

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>

#include "adon/agent/react.hpp"
#include "adon/agent/scripted.hpp"
#include "adon/optimizer/bayes.hpp"
#include "adon/optimizer/environment.hpp"
#include "adon/optimizer/search.hpp"
#include "adon/scenario/network_state.hpp"

namespace adon::runner {

// Optimizer test instance: the noiseless plant drawn from `seed` with
// `load` channels lit.
inline opt::TwinEnvironment optimizer_instance(std::uint64_t seed, int load, const physics::LinkTopology& nominal) {
  scenario::NetworkState state(seed, nominal);
  scenario::apply_wavelength_change(state, load);
  return opt::truth_environment(state);
}

struct MethodOptions {
  std::uint64_t seed = 0;
  int budget = 100;        // bo evaluations; react iterations when > 0
  GainConfig init = GainConfig::flat(18.0);
  opt::CoordinateAscentOptions coord;
};

inline bool is_method(const std::string& m) { return m == "brute" || m == "bo" || m == "coord" || m == "react"; }

inline opt::OptimizerReport run_method(opt::Environment& env, const std::string& method, const MethodOptions& o) {
  if (method == "brute") return opt::brute_force(env, opt::default_gain_grid());
  if (method == "bo") {
    opt::BayesOptOptions b;
    b.budget = o.budget;
    b.seed = o.seed;
    return opt::bayes_opt(env, opt::SearchSpace::gains(), b);
  }
  if (method == "coord") return opt::coordinate_ascent(env, o.init, o.coord);
  if (method == "react") {
    agent::ScriptedPolicy policy;
    agent::ReactOptions r;
    r.schedule = o.coord;
    r.max_iters = 100000;
    return agent::react_optimize(env, policy, o.init, r);
  }
  throw ValidationError("unknown method '" + method + "'; expected brute, bo, coord or react");
}

// Trace rows followed by one comment line comparing the best value to the
// default-grid brute-force optimum.
inline void write_trace_with_footer(std::ostream& os, const opt::OptimizerReport& r, std::optional<double> oracle) {
  opt::write_trace_csv(os, r);
  os << "# method=" << r.method << " evaluations=" << r.evaluations << " best=" << format_double(r.best_value);
  if (oracle)
    os << " oracle=" << format_double(*oracle) << " gap_db=" << format_double(*oracle - r.best_value);
  os << '\n';
}

}  // namespace adon::runner

#endif  // ADON_RUNNER_EXPERIMENTS_HPP_
