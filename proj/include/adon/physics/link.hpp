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

#ifndef ADON_PHYSICS_LINK_HPP_
#define ADON_PHYSICS_LINK_HPP_

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "adon/core/error.hpp"
#include "adon/core/gain_config.hpp"

namespace adon::physics {

struct PhysicalConstants {
  double planck = 6.62607015e-34;        // J*s
  double reference_bandwidth_hz = 12.5e9;  // ASE/OSNR reference bandwidth
};

// Fixed grid of equally spaced slots. Slot i sits at anchor + i * spacing.
struct ChannelGrid {
  int slot_count = 30;
  double spacing_hz = 75e9;
  double anchor_hz = 193.05e12;
  double channel_bandwidth_hz = 63.9e9;
  std::vector<bool> active = std::vector<bool>(30, false);
  std::vector<bool> is_real = std::vector<bool>(30, false);  // transponder-carrying

  static constexpr int kMaxRealChannels = 6;

  double frequency(int slot) const { return anchor_hz + slot * spacing_hz; }
  double min_frequency() const { return frequency(0); }
  double max_frequency() const { return frequency(slot_count - 1); }
  double mid_frequency() const { return 0.5 * (min_frequency() + max_frequency()); }

  int active_count() const {
    int n = 0;
    for (bool a : active) n += a ? 1 : 0;
    return n;
  }
  int real_count() const {
    int n = 0;
    for (int i = 0; i < slot_count; ++i) n += (active[i] && is_real[i]) ? 1 : 0;
    return n;
  }
  std::vector<int> active_slots() const {
    std::vector<int> out;
    for (int i = 0; i < slot_count; ++i)
      if (active[i]) out.push_back(i);
    return out;
  }

  void validate() const {
    if (slot_count <= 0) throw ValidationError("grid needs at least one slot");
    if (!(spacing_hz > 0.0)) throw ValidationError("grid spacing must be positive");
    if (!(channel_bandwidth_hz > 0.0) || channel_bandwidth_hz > spacing_hz)
      throw ValidationError("channel bandwidth must be in (0, spacing]");
    if (static_cast<int>(active.size()) != slot_count ||
        static_cast<int>(is_real.size()) != slot_count)
      throw ValidationError("grid occupancy vectors must have slot_count entries");
    int real = 0;
    for (bool r : is_real) real += r ? 1 : 0;
    if (real > kMaxRealChannels)
      throw ValidationError("at most 6 transponder-carrying slots are supported");
  }
};

struct Span {
  double length_km = 110.0;
  double attenuation_db_per_km = 0.20;
  double extra_loss_db = 0.0;  // aging, splices, VOA
  double beta2_ps2_per_km = 21.3;  // |beta2|
  double gamma_per_w_km = 1.3;
  bool is_cut = false;

  double fiber_loss_db() const { return attenuation_db_per_km * length_km; }
  double total_loss_db() const { return fiber_loss_db() + extra_loss_db; }

  void validate() const {
    if (!(length_km >= 0.0)) throw ValidationError("span length must be non-negative");
    if (!(attenuation_db_per_km > 0.0))
      throw ValidationError("span attenuation must be positive");
    if (!(extra_loss_db >= 0.0)) throw ValidationError("span extra loss must be >= 0");
  }
};

struct Amplifier {
  double gain_db = 18.0;
  double tilt_db = 0.0;  // edge-to-edge across the grid band
  double noise_figure_db = 5.0;
};

// Booster -> (span, inline) x N -> preamp. The field plant has four spans and
// six amplifiers; the physics accepts any span count with amps = spans + 2.
struct LinkTopology {
  std::vector<Span> spans = std::vector<Span>(kSpanCount);
  std::vector<Amplifier> amplifiers = std::vector<Amplifier>(kAmplifierCount);
  ChannelGrid grid;
  PhysicalConstants constants;
  double launch_power_dbm = -18.0;  // per channel, transponder side of the booster
  double q_offset_db = 0.0;         // Q = GSNR - offset
  double gsnr_cap_db = 60.0;

  void validate() const {
    if (amplifiers.size() != spans.size() + 2)
      throw ValidationError("amplifier count must equal span count + 2");
    for (const auto& s : spans) s.validate();
    grid.validate();
    if (!(constants.reference_bandwidth_hz > 0.0))
      throw ValidationError("reference bandwidth must be positive");
  }

  void apply(const GainConfig& config) {
    if (amplifiers.size() != kAmplifierCount)
      throw ValidationError("gain configs address exactly six amplifiers");
    for (std::size_t i = 0; i < kAmplifierCount; ++i) {
      amplifiers[i].gain_db = config.gains_db[i];
      amplifiers[i].tilt_db = config.tilts_db[i];
    }
  }

  GainConfig gain_config() const {
    GainConfig c;
    for (std::size_t i = 0; i < kAmplifierCount && i < amplifiers.size(); ++i) {
      c.gains_db[i] = amplifiers[i].gain_db;
      c.tilts_db[i] = amplifiers[i].tilt_db;
    }
    return c;
  }
};

// Per-slot launch vector with the same power on every active slot.
inline std::vector<double> uniform_launch(const ChannelGrid& grid, double dbm) {
  std::vector<double> out(grid.slot_count, 0.0);
  const double w = 1e-3 * std::pow(10.0, dbm / 10.0);
  for (int i = 0; i < grid.slot_count; ++i)
    if (grid.active[i]) out[i] = w;
  return out;
}

}  // namespace adon::physics

#endif  // ADON_PHYSICS_LINK_HPP_
