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

#include <nlohmann/json.hpp>

#include "adon/optimizer/bayes.hpp"
#include "adon/optimizer/environment.hpp"
#include "adon/optimizer/search.hpp"

namespace adon::opt {
namespace {

nlohmann::json golden() {
  std::ifstream in(std::string(ADON_TEST_DATA_DIR) + "/golden_optimizer.json");
  return nlohmann::json::parse(in);
}

physics::ChannelGrid grid_with(int load) {
  physics::ChannelGrid g;
  for (int s = 0; s < load; ++s) {
    g.active[s] = true;
    g.is_real[s] = s % 5 == 0;
  }
  return g;
}

TwinEnvironment golden_env() {
  const auto j = golden()["brute_force_2x3"];
  twin::TwinParameters p;
  for (std::size_t s = 0; s < kSpanCount; ++s) p.extra_loss_db[s] = j["extra_loss_db"][s];
  for (std::size_t k = 0; k < kAmplifierCount; ++k) p.nf_db[k] = j["nf_db"][k];
  return {physics::LinkTopology{}, p, grid_with(20)};
}

TEST(Objective, SingleChannelIsItsQ) {
  physics::ChannelGrid g;
  g.active[7] = g.is_real[7] = true;
  TwinEnvironment env({}, {}, g);
  const auto snap = twin::predict({}, {}, GainConfig::flat(18.0), g);
  EXPECT_EQ(env.evaluate(GainConfig::flat(18.0)), *snap.channels[0].q_factor_db);
}

TEST(Objective, WorstChannelDecides) {
  TwinEnvironment env = golden_env();
  const auto c = GainConfig::flat(18.0);
  const auto snap = twin::predict(env.parameters(), {}, c, env.grid());
  EXPECT_EQ(env.evaluate(c), *snap.min_real_q_db());
  EXPECT_EQ(env.evaluate(c), env.evaluate(c));
}

TEST(Objective, Errors) {
  TwinEnvironment empty({}, {}, physics::ChannelGrid{});
  EXPECT_THROW(empty.evaluate(GainConfig::flat(18.0)), NoActiveChannels);
  scenario::NetworkState state(1);
  scenario::apply_wavelength_change(state, 10);
  telemetry::TelemetrySampler sampler(1);
  PlantEnvironment plant(state, sampler);
  EXPECT_NO_THROW(plant.evaluate(GainConfig::flat(18.0)));
  EXPECT_EQ(plant.tick(), 1);
  state.set_cut(3, true);
  EXPECT_THROW(plant.evaluate(GainConfig::flat(18.0)), CutLinkError);
}

TEST(BruteForce, MatchesIndependentEnumeration) {
  const auto j = golden()["brute_force_2x3"];
  TwinEnvironment env = golden_env();
  GainGrid grid;
  grid[1] = grid[2] = {16.0, 18.0, 20.0};
  const auto report = brute_force(env, grid);
  ASSERT_EQ(report.evaluations, 9u);
  for (std::size_t i = 0; i < 9; ++i) {
    const auto& row = j["rows"][i];
    for (std::size_t k = 0; k < kAmplifierCount; ++k)
      EXPECT_EQ(report.trace[i].config.gains_db[k], row["gains"][k].get<double>());
    const double want = row["value"];
    EXPECT_NEAR(report.trace[i].value, want, 1e-9 * std::abs(want));
  }
  for (std::size_t k = 0; k < kAmplifierCount; ++k)
    EXPECT_EQ(report.best_config.gains_db[k], j["best_gains"][k].get<double>());
}

TEST(BruteForce, SinglePointGrid) {
  TwinEnvironment env = golden_env();
  GainGrid grid;
  grid[0] = {15.5};
  const auto report = brute_force(env, grid);
  ASSERT_EQ(report.evaluations, 1u);
  GainConfig want = GainConfig::flat(18.0);
  want.gains_db[0] = 15.5;
  EXPECT_EQ(report.best_config, want);
}

TEST(BruteForce, PermutationInvariant) {
  TwinEnvironment env = golden_env();
  GainGrid a, b;
  a[1] = {16.0, 18.0, 20.0, 22.0};
  b[1] = {22.0, 16.0, 20.0, 18.0, 16.0};
  a[3] = {14.0, 20.0};
  b[3] = {20.0, 14.0};
  const auto ra = brute_force(env, a), rb = brute_force(env, b);
  EXPECT_EQ(ra.best_config, rb.best_config);
  EXPECT_EQ(ra.best_value, rb.best_value);
}

TEST(BruteForce, RefusesHugeGrids) {
  TwinEnvironment env = golden_env();
  GainGrid grid;
  grid.fill({10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20});
  EXPECT_THROW(brute_force(env, grid), GridTooLarge);
}

TEST(BruteForce, EqualsNestedLoopOracle) {
  TwinEnvironment env = golden_env();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(12.0, 24.0);
  for (int trial = 0; trial < 3; ++trial) {
    GainGrid grid;
    for (auto& v : grid) v = {u(rng), u(rng), u(rng)};
    const auto report = brute_force(env, grid);
    ASSERT_EQ(report.evaluations, 729u);
    GainConfig best;
    double best_v = -1e300;
    for (double a : grid[0]) for (double b : grid[1]) for (double c : grid[2])
      for (double d : grid[3]) for (double e : grid[4]) for (double f : grid[5]) {
        GainConfig cfg;
        cfg.gains_db = {a, b, c, d, e, f};
        const double v = env.value(cfg);
        if (v > best_v || (v == best_v && cfg < best)) {
          best_v = v;
          best = cfg;
        }
      }
    EXPECT_EQ(report.best_config, best);
    EXPECT_EQ(report.best_value, best_v);
  }
}

TEST(BruteForce, ThreadedMatchesSequential) {
  TwinEnvironment env = golden_env();
  GainGrid grid;
  grid[1] = grid[2] = grid[3] = {16.0, 18.0, 20.0, 22.0};
  const auto seq = brute_force(env, grid);
  const auto par = brute_force(env, grid, GainConfig::flat(18.0), 4);
  EXPECT_EQ(seq.trace, par.trace);
  EXPECT_EQ(seq.best_config, par.best_config);
}

TEST(CoordinateAscent, GridOptimumIsStationaryAtGridStep) {
  TwinEnvironment env = golden_env();
  const auto bf = brute_force(env, default_gain_grid());
  CoordinateAscentOptions o;
  o.step_db = 2.0;
  o.min_step_db = 2.0;
  o.include_tilts = false;
  o.gain_min_db = 14.0;
  o.gain_max_db = 22.0;
  const auto ca = coordinate_ascent(env, bf.best_config, o);
  EXPECT_EQ(ca.best_config, bf.best_config);
  EXPECT_EQ(ca.best_value, bf.best_value);
}

TEST(CoordinateAscent, BestSoFarNeverDecreases) {
  scenario::NetworkState state(3);
  scenario::apply_wavelength_change(state, 25);
  telemetry::TelemetrySampler sampler(3);
  PlantEnvironment plant(state, sampler);
  const auto report = coordinate_ascent(plant, GainConfig::flat(18.0));
  const auto best = report.best_so_far();
  for (std::size_t i = 1; i < best.size(); ++i) EXPECT_GE(best[i], best[i - 1]);
  EXPECT_EQ(report.best_value, best.back());
}

TEST(CoordinateAscent, ReachesBruteForceFromFlat) {
  TwinEnvironment env = golden_env();
  const auto bf = brute_force(env, default_gain_grid());
  CoordinateAscentOptions o;
  o.include_tilts = false;
  const auto ca = coordinate_ascent(env, GainConfig::flat(18.0), o);
  EXPECT_GE(ca.best_value, bf.best_value - 0.3);
}

TEST(Gp, MatchesHandSolvedThreePointSystem) {
  const auto j = golden()["gp_1d_3pt"];
  std::vector<std::vector<double>> x;
  for (double v : j["x"]) x.push_back({v});
  const auto y = j["y"].get<std::vector<double>>();
  std::vector<std::vector<double>> q;
  for (const auto& e : j["queries"]) q.push_back({e["x"].get<double>()});
  const auto pred = gp_regress(x, y, q, {j["length_scale"], j["noise_std"]});
  for (std::size_t i = 0; i < q.size(); ++i) {
    EXPECT_NEAR(pred[i].mean, j["queries"][i]["mean"].get<double>(), 1e-9);
    EXPECT_NEAR(pred[i].variance, j["queries"][i]["variance"].get<double>(), 1e-9);
  }
}

TEST(Gp, InterpolatesWithoutNoise) {
  const std::vector<std::vector<double>> x = {{0.1, 0.2}, {0.5, 0.9}, {0.8, 0.3}};
  const std::vector<double> y = {3.0, -1.0, 2.0};
  const auto pred = gp_regress(x, y, x, {0.3, 0.0});
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(pred[i].mean, y[i], 1e-6);
    EXPECT_NEAR(pred[i].variance, 0.0, 1e-6);
  }
}

TEST(Gp, FarQueryRevertsToPrior) {
  const std::vector<std::vector<double>> x = {{0.1}, {0.2}, {0.4}};
  const std::vector<double> y = {1.0, 2.0, 6.0};
  const GaussianProcess gp(x, y);
  const auto p = gp.predict(std::vector<double>{25.0});
  EXPECT_NEAR(p.mean, 3.0, 1e-12);
  EXPECT_NEAR(p.variance, gp.prior_variance(), 1e-12);
}

TEST(Gp, PosteriorVarianceNeverExceedsPrior) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int i = 0; i < 30; ++i) {
    x.push_back({u(rng), u(rng), u(rng)});
    y.push_back(5.0 * u(rng));
  }
  const GaussianProcess gp(x, y);
  for (int i = 0; i < 500; ++i) {
    const auto p = gp.predict(std::vector<double>{u(rng), u(rng), u(rng)});
    EXPECT_LE(p.variance, gp.prior_variance() + 1e-12);
    EXPECT_GE(p.variance, 0.0);
  }
}

TEST(Gp, ExpectedImprovementIsNonNegative) {
  std::vector<std::vector<double>> x = {{0.1}, {0.3}, {0.7}, {0.9}};
  const std::vector<double> y = {1.0, 4.0, 2.0, 0.5};
  const GaussianProcess noiseless(x, y, {0.3, 0.0});
  for (const auto& xi : x)
    EXPECT_NEAR(expected_improvement(noiseless.predict(xi), 4.0), 0.0, 1e-9);
  const GaussianProcess gp(x, y);
  for (int i = 0; i <= 200; ++i) {
    const double q = -0.5 + 2.0 * i / 200.0;
    EXPECT_GE(expected_improvement(gp.predict(std::vector<double>{q}), 4.0), 0.0);
  }
}

TEST(BayesOpt, ConcaveQuadraticIn1d) {
  const double lo[] = {0.0}, hi[] = {1.0};
  BayesOptOptions o;
  o.budget = 20;
  o.n_init = 5;
  o.seed = 1;
  const auto t = bayes_opt_box([](std::span<const double> x) { return -(x[0] - 0.37) * (x[0] - 0.37); },
                               lo, hi, o);
  ASSERT_EQ(t.y.size(), 20u);
  const auto best = std::max_element(t.y.begin(), t.y.end()) - t.y.begin();
  EXPECT_NEAR(t.x[best][0], 0.37, 0.05);
}

TEST(BayesOpt, SeededRunsRepeat) {
  TwinEnvironment env = golden_env();
  BayesOptOptions o;
  o.budget = 25;
  o.seed = 9;
  const auto a = bayes_opt(env, SearchSpace::gains(), o);
  const auto b = bayes_opt(env, SearchSpace::gains(), o);
  EXPECT_EQ(a.trace, b.trace);
  const auto best = a.best_so_far();
  for (std::size_t i = 1; i < best.size(); ++i) EXPECT_GE(best[i], best[i - 1]);
}

TEST(BayesOpt, BudgetMustExceedInitialDesign) {
  TwinEnvironment env = golden_env();
  BayesOptOptions o;
  o.budget = 10;
  o.n_init = 10;
  EXPECT_THROW(bayes_opt(env, SearchSpace::gains(), o), ValidationError);
}

TEST(BayesOpt, CloseToBruteForceOnSixAmplifiers) {
  TwinEnvironment env = golden_env();
  const auto bf = brute_force(env, default_gain_grid());
  BayesOptOptions o;
  o.budget = 100;
  o.seed = 0;
  const auto bo = bayes_opt(env, SearchSpace::gains(), o);
  EXPECT_EQ(bo.evaluations, 100u);
  EXPECT_GE(bo.best_value, bf.best_value - 0.3) << "bf " << bf.best_value << " bo " << bo.best_value;
}

TEST(TraceCsv, Layout) {
  TwinEnvironment env = golden_env();
  GainGrid grid;
  grid[0] = {16.0, 17.5};
  const auto r = brute_force(env, grid);
  std::ostringstream os;
  write_trace_csv(os, r);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, trace_csv_header());
  std::getline(in, line);
  EXPECT_EQ(line.rfind("0,0,16,18,18,18,18,18,0,0,0,0,0,0,", 0), 0u) << line;
}

}  // namespace
}  // namespace adon::opt
