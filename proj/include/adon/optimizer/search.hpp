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

#ifndef ADON_OPTIMIZER_SEARCH_HPP_
#define ADON_OPTIMIZER_SEARCH_HPP_

#include <algorithm>
#include <array>
#include <thread>
#include <vector>

#include "adon/core/error.hpp"
#include "adon/core/gain_config.hpp"
#include "adon/optimizer/environment.hpp"

namespace adon::opt {

class GridTooLarge : public Error {
 public:
  using Error::Error;
};

inline constexpr double kMaxGridPoints = 1e6;

// Gain levels per amplifier. An empty list pins that amplifier to the base
// configuration.
using GainGrid = std::array<std::vector<double>, kAmplifierCount>;

inline GainGrid default_gain_grid() {
  GainGrid g;
  g.fill({14.0, 16.0, 18.0, 20.0, 22.0});
  return g;
}

// Exhaustive search with tilts at zero. Points are visited in lexicographic
// order, so the first maximum found is also the lexicographically smallest.
inline OptimizerReport brute_force(Environment& env, GainGrid grid,
                                   const GainConfig& base = GainConfig::flat(18.0),
                                   unsigned threads = 1) {
  double points = 1.0;
  for (std::size_t k = 0; k < kAmplifierCount; ++k) {
    auto& v = grid[k];
    if (v.empty()) v.push_back(base.gains_db[k]);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    points *= static_cast<double>(v.size());
  }
  if (points > kMaxGridPoints)
    throw GridTooLarge("brute-force grid has " + std::to_string(static_cast<long long>(points)) +
                       " points; limit is 1000000");

  std::vector<GainConfig> configs;
  configs.reserve(static_cast<std::size_t>(points));
  std::array<std::size_t, kAmplifierCount> idx{};
  while (true) {
    GainConfig c;
    for (std::size_t k = 0; k < kAmplifierCount; ++k) c.gains_db[k] = grid[k][idx[k]];
    c.tilts_db.fill(0.0);
    configs.push_back(c);
    std::size_t k = kAmplifierCount;
    while (k > 0 && ++idx[k - 1] == grid[k - 1].size()) idx[--k] = 0;
    if (k == 0) break;
  }

  Recorder rec(env, "brute");
  if (threads > 1 && env.pure()) {
    std::vector<double> values(configs.size());
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < configs.size(); i += threads) values[i] = env.evaluate(configs[i]);
      });
    for (auto& th : pool) th.join();
    for (std::size_t i = 0; i < configs.size(); ++i) rec.add(configs[i], values[i], env.tick());
  } else {
    for (const auto& c : configs) rec(c);
  }
  return rec.finish();
}

struct CoordinateAscentOptions {
  double step_db = 0.5;
  double min_step_db = 0.125;
  int max_sweeps = 10;
  bool include_tilts = true;
  double gain_min_db = kMinGainDb;
  double gain_max_db = kMaxGainDb;
};

// Index < 6 addresses a gain, 6..11 a tilt.
inline double& coordinate(GainConfig& c, std::size_t i) {
  return i < kAmplifierCount ? c.gains_db[i] : c.tilts_db[i - kAmplifierCount];
}

// Cyclic probing: for each coordinate, walk +step while that improves; if
// the first +step fails, walk -step instead. A sweep without any accepted
// move halves the step.
inline OptimizerReport coordinate_ascent(Environment& env, const GainConfig& init,
                                         const CoordinateAscentOptions& opt = {}) {
  init.validate();
  Recorder rec(env, "coord");
  GainConfig x = init;
  double fx = rec(x);
  const std::size_t coords = opt.include_tilts ? 2 * kAmplifierCount : kAmplifierCount;
  double step = opt.step_db;
  for (int sweep = 0; sweep < opt.max_sweeps && step >= opt.min_step_db; ++sweep) {
    bool improved = false;
    for (std::size_t i = 0; i < coords; ++i) {
      const bool tilt = i >= kAmplifierCount;
      const double lo = tilt ? kMinTiltDb : opt.gain_min_db;
      const double hi = tilt ? kMaxTiltDb : opt.gain_max_db;
      for (double dir : {1.0, -1.0}) {
        bool moved = false;
        while (true) {
          GainConfig cand = x;
          coordinate(cand, i) = std::clamp(coordinate(x, i) + dir * step, lo, hi);
          if (coordinate(cand, i) == coordinate(x, i)) break;
          const double fc = rec(cand);
          if (!(fc > fx)) break;
          x = cand;
          fx = fc;
          moved = improved = true;
        }
        if (moved) break;
      }
    }
    if (!improved) step /= 2.0;
  }
  return rec.finish();
}

}  // namespace adon::opt

#endif  // ADON_OPTIMIZER_SEARCH_HPP_
