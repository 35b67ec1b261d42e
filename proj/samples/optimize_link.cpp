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


// Builds the datasheet link with 20 channels lit, prints per-channel Q for
// flat 18 dB gains, then tunes the gains with coordinate ascent.

#include <cstdio>

#include "adon/optimizer/search.hpp"
#include "adon/runner/experiments.hpp"

int main() {
  using namespace adon;
  auto env = runner::optimizer_instance(/*seed=*/7, /*load=*/20, physics::LinkTopology{});

  const auto flat = GainConfig::flat(18.0);
  const auto snap = twin::predict(env.parameters(), physics::LinkTopology{}, flat, env.grid());
  for (const auto& ch : snap.channels)
    if (ch.q_factor_db) std::printf("slot %2d  Q %.2f dB\n", ch.slot, *ch.q_factor_db);

  opt::CoordinateAscentOptions o;
  o.include_tilts = false;
  const auto best = opt::coordinate_ascent(env, flat, o);
  std::printf("min-Q %.3f dB -> %.3f dB after %zu evaluations at %s\n", env.value(flat), best.best_value,
              best.evaluations, best.best_config.to_string().c_str());
}
