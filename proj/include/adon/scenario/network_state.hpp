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

#ifndef ADON_SCENARIO_NETWORK_STATE_HPP_
#define ADON_SCENARIO_NETWORK_STATE_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "adon/core/error.hpp"
#include "adon/core/gain_config.hpp"
#include "adon/physics/link.hpp"
#include "adon/physics/propagation.hpp"
#include "adon/scenario/scenario.hpp"

namespace adon::scenario {

// Plant parameters the operator never sees directly. Drawn once per run from
// the scenario seed.
struct GroundTruth {
  std::array<double, kSpanCount> hidden_extra_loss_db{};
  std::array<double, kAmplifierCount> hidden_nf_db{};
  std::array<double, kSpanCount> splice_loss_on_repair_db{};  // applied by RepairCut
  std::array<double, kSpanCount> aging_db{};                  // accumulated by ramps
  std::array<double, kSpanCount> splice_db{};                 // applied so far

  static GroundTruth draw(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> loss(0.0, 1.5);
    std::uniform_real_distribution<double> nf(4.5, 6.5);
    std::uniform_real_distribution<double> splice(0.1, 0.3);
    GroundTruth g;
    for (auto& x : g.hidden_extra_loss_db) x = loss(rng);
    for (auto& x : g.hidden_nf_db) x = nf(rng);
    for (auto& x : g.splice_loss_on_repair_db) x = splice(rng);
    return g;
  }

  double span_extra_loss_db(std::size_t s) const {
    return hidden_extra_loss_db[s] + aging_db[s] + splice_db[s];
  }
};

struct AgingRampState {
  int span = 0;
  double rate_db = 0.0;
  double cap_db = 0.0;
  double applied_db = 0.0;

  bool done() const { return applied_db >= cap_db; }
};

// Mutable plant state, owned by a single executor.
class NetworkState {
 public:
  explicit NetworkState(std::uint64_t seed, physics::LinkTopology nominal = {})
      : nominal_(std::move(nominal)), truth_(GroundTruth::draw(seed)) {
    nominal_.validate();
    grid_ = nominal_.grid;
    std::fill(grid_.active.begin(), grid_.active.end(), false);
    std::fill(grid_.is_real.begin(), grid_.is_real.end(), false);
    config_ = nominal_.gain_config();
  }

  // Datasheet view: no extra loss, nominal noise figures.
  const physics::LinkTopology& nominal() const { return nominal_; }
  const GroundTruth& ground_truth() const { return truth_; }
  const physics::ChannelGrid& grid() const { return grid_; }
  const GainConfig& config() const { return config_; }
  bool is_cut(std::size_t span) const { return cut_[span]; }
  int tick() const { return tick_; }
  std::uint64_t config_epoch() const { return epoch_; }
  int load() const { return grid_.active_count(); }
  const std::vector<AgingRampState>& ramps() const { return ramps_; }

  // The true plant with current occupancy and configuration.
  physics::LinkTopology plant() const {
    physics::LinkTopology link = nominal_;
    link.grid = grid_;
    link.apply(config_);
    for (std::size_t s = 0; s < kSpanCount; ++s) {
      link.spans[s].extra_loss_db = truth_.span_extra_loss_db(s);
      link.spans[s].is_cut = cut_[s];
    }
    for (std::size_t k = 0; k < kAmplifierCount; ++k)
      link.amplifiers[k].noise_figure_db = truth_.hidden_nf_db[k];
    return link;
  }

  std::vector<double> launch() const {
    return physics::uniform_launch(grid_, nominal_.launch_power_dbm);
  }

  physics::LinkSnapshot evaluate() const { return physics::transmit(plant(), launch()); }
  physics::LinkSnapshot evaluate(const GainConfig& config) const {
    return physics::transmit(plant(), launch(), config);
  }

  void set_tick(int t) {
    if (t < tick_) throw ValidationError("clock must be monotone");
    tick_ = t;
  }

  void set_config(const GainConfig& c) {
    c.validate();
    if (c != config_) {
      config_ = c;
      ++epoch_;
    }
  }

  void set_cut(std::size_t span, bool cut) { cut_.at(span) = cut; }
  void add_ramp(const AgingRampState& r) { ramps_.push_back(r); }

  // Advances every unfinished ramp by one tick.
  void advance_ramps() {
    for (auto& r : ramps_) {
      if (r.done()) continue;
      const double inc = std::min(r.rate_db, r.cap_db - r.applied_db);
      r.applied_db += inc;
      truth_.aging_db[r.span] += inc;
    }
  }

  void apply_repair_splice(std::size_t span) {
    truth_.splice_db[span] += truth_.splice_loss_on_repair_db[span];
  }

  physics::ChannelGrid& mutable_grid() { return grid_; }
  void bump_epoch() { ++epoch_; }

 private:
  physics::LinkTopology nominal_;
  GroundTruth truth_;
  physics::ChannelGrid grid_;
  GainConfig config_;
  std::array<bool, kSpanCount> cut_{};
  std::vector<AgingRampState> ramps_;
  int tick_ = 0;
  std::uint64_t epoch_ = 0;
};

// Adds or drops whole batches of five. Adds take the lowest free slots and
// mark the first slot of each batch as transponder-carrying; drops remove the
// highest occupied slots. Returns the changed slot ids, ascending.
inline std::vector<int> apply_wavelength_change(NetworkState& state, int target_load) {
  if (target_load < 0 || target_load > kMaxLoad || target_load % kBatchSize != 0)
    throw ValidationError("invalid load " + std::to_string(target_load) +
                          ": must be a multiple of 5 in [0, 30]");
  physics::ChannelGrid& grid = state.mutable_grid();
  std::vector<int> changed;
  int load = grid.active_count();
  while (load < target_load) {
    std::vector<int> batch;
    for (int s = 0; s < grid.slot_count && static_cast<int>(batch.size()) < kBatchSize; ++s)
      if (!grid.active[s]) batch.push_back(s);
    if (static_cast<int>(batch.size()) < kBatchSize) throw ValidationError("grid is full");
    const bool real = grid.real_count() < physics::ChannelGrid::kMaxRealChannels;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      grid.active[batch[i]] = true;
      grid.is_real[batch[i]] = real && i == 0;
      changed.push_back(batch[i]);
    }
    load += kBatchSize;
  }
  while (load > target_load) {
    int removed = 0;
    for (int s = grid.slot_count - 1; s >= 0 && removed < kBatchSize; --s) {
      if (!grid.active[s]) continue;
      grid.active[s] = false;
      grid.is_real[s] = false;
      changed.push_back(s);
      ++removed;
    }
    load -= kBatchSize;
  }
  std::sort(changed.begin(), changed.end());
  if (!changed.empty()) state.bump_epoch();
  return changed;
}

}  // namespace adon::scenario

#endif  // ADON_SCENARIO_NETWORK_STATE_HPP_
