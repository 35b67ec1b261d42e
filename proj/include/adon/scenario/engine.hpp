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

#ifndef ADON_SCENARIO_ENGINE_HPP_
#define ADON_SCENARIO_ENGINE_HPP_

#include <cstddef>
#include <vector>

#include "adon/core/error.hpp"
#include "adon/scenario/network_state.hpp"
#include "adon/scenario/scenario.hpp"

namespace adon::scenario {

// What step() does with add/drop requests. In an agent-driven run they are
// handed to the agent; a bare replay applies them directly.
enum class ServicePolicy { kApply, kDefer };

class ScenarioEngine {
 public:
  explicit ScenarioEngine(Scenario scenario) : scenario_(std::move(scenario)) {}

  const Scenario& scenario() const { return scenario_; }

  // Schedules an out-of-band event for the next step.
  void inject(Event e) {
    e.validate();
    injected_.push_back(e);
  }

  // Applies every event due at `tick` and advances aging ramps. Returns the
  // events that fired, in order (deferred service events included).
  std::vector<Event> step(NetworkState& state, int tick,
                          ServicePolicy policy = ServicePolicy::kApply) {
    if (started_ && tick <= last_tick_) throw ValidationError("scenario clock must advance");
    started_ = true;
    last_tick_ = tick;
    state.set_tick(tick);

    std::vector<Event> due;
    while (cursor_ < scenario_.events.size() && scenario_.events[cursor_].at_tick <= tick) {
      due.push_back(scenario_.events[cursor_++]);
    }
    for (auto& e : injected_) {
      e.at_tick = tick;
      due.push_back(e);
    }
    injected_.clear();

    for (const Event& e : due) apply(state, e, policy);
    state.advance_ramps();
    return due;
  }

  bool finished(int tick) const {
    return cursor_ >= scenario_.events.size() && tick >= scenario_.duration_ticks();
  }

 private:
  static void apply(NetworkState& state, const Event& e, ServicePolicy policy) {
    switch (e.kind) {
      case EventKind::kEstablishBatches:
      case EventKind::kSetLoad:
        if (policy == ServicePolicy::kApply) apply_wavelength_change(state, e.target_load());
        break;
      case EventKind::kFiberCut:
        state.set_cut(e.span(), true);
        break;
      case EventKind::kRepairCut:
        if (state.is_cut(e.span())) {
          state.set_cut(e.span(), false);
          state.apply_repair_splice(e.span());
        }
        break;
      case EventKind::kAgingRamp:
        state.add_ramp({e.span(), e.rate_db, e.cap_db, 0.0});
        break;
    }
  }

  Scenario scenario_;
  std::size_t cursor_ = 0;
  std::vector<Event> injected_;
  int last_tick_ = 0;
  bool started_ = false;
};

}  // namespace adon::scenario

#endif  // ADON_SCENARIO_ENGINE_HPP_
