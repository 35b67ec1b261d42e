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

#ifndef ADON_PHYSICS_PROPAGATION_HPP_
#define ADON_PHYSICS_PROPAGATION_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "adon/core/dual.hpp"
#include "adon/core/error.hpp"
#include "adon/core/gain_config.hpp"
#include "adon/core/units.hpp"
#include "adon/physics/link.hpp"

namespace adon::physics {

struct EffectiveLength {
  double l_eff_km = 0.0;
  double l_eff_asymptotic_km = 0.0;
};

// Linear attenuation per km from a dB/km coefficient.
inline double attenuation_per_km(double alpha_db_per_km) {
  return alpha_db_per_km / (10.0 * std::log10(std::numbers::e));
}

inline EffectiveLength effective_length(const Span& span) {
  const double a = attenuation_per_km(span.attenuation_db_per_km);
  return {(1.0 - std::exp(-a * span.length_km)) / a, 1.0 / a};
}

// Incoherent GN closed form for one channel under a load of n_active
// identical channels. Result is referred to the span input, in watts.
template <class T>
T nli_power(const T& channel_input_power_w, const Span& span, const ChannelGrid& grid,
            int n_active) {
  if (span.is_cut || n_active < 1) return T(0.0);
  const auto le = effective_length(span);
  const double l_eff = le.l_eff_km * 1e3;                 // m
  const double l_eff_a = le.l_eff_asymptotic_km * 1e3;    // m
  const double gamma = span.gamma_per_w_km * 1e-3;        // 1/(W m)
  const double beta2 = span.beta2_ps2_per_km * 1e-27;     // s^2/m
  const double b = grid.channel_bandwidth_hz;
  const double pi = std::numbers::pi;

  double dispersion_term;
  const double load = std::pow(static_cast<double>(n_active), 2.0 * b / grid.spacing_hz);
  if (beta2 > 0.0) {
    dispersion_term =
        std::asinh(0.5 * pi * pi * beta2 * l_eff_a * b * b * load) / (pi * beta2 * l_eff_a);
  } else {
    dispersion_term = 0.5 * pi * b * b * load;  // beta2 -> 0 limit
  }
  const double coeff = (8.0 / 27.0) * gamma * gamma * l_eff * l_eff / (b * b) * dispersion_term;
  return coeff * channel_input_power_w * channel_input_power_w * channel_input_power_w;
}

inline std::vector<double> propagate_span(std::span<const double> powers_w, const Span& span) {
  std::vector<double> out(powers_w.begin(), powers_w.end());
  if (span.is_cut) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  const double t = std::pow(10.0, -span.total_loss_db() / 10.0);
  for (auto& p : out) p *= t;
  return out;
}

// Per-channel gain in dB: flat gain plus a linear-in-frequency tilt spanning
// the grid band edge to edge.
inline double channel_gain_db(const Amplifier& amp, const ChannelGrid& grid, int slot) {
  const double span_hz = grid.max_frequency() - grid.min_frequency();
  const double rel = span_hz > 0.0 ? (grid.frequency(slot) - grid.mid_frequency()) / span_hz : 0.0;
  return amp.gain_db + amp.tilt_db * rel;
}

struct AmplifiedPowers {
  std::vector<double> signal_w;
  std::vector<double> ase_w;
};

// ASE added by one amplifier, referred to its output.
template <class T>
T added_ase(double gain_linear, const T& nf_linear, double frequency_hz,
            const PhysicalConstants& c) {
  const double excess = std::max(gain_linear - 1.0, 0.0);
  return c.planck * frequency_hz * nf_linear * excess * c.reference_bandwidth_hz;
}

// Inputs are per active slot, ascending.
inline AmplifiedPowers amplify(std::span<const double> powers_w, std::span<const double> ase_w,
                               const Amplifier& amp, const ChannelGrid& grid,
                               const PhysicalConstants& constants = {}) {
  const auto slots = grid.active_slots();
  if (powers_w.size() != slots.size() || ase_w.size() != slots.size())
    throw ValidationError("amplify expects one entry per active slot");
  AmplifiedPowers out{{powers_w.begin(), powers_w.end()}, {ase_w.begin(), ase_w.end()}};
  const double nf = db_to_linear(amp.noise_figure_db);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const double g = db_to_linear(channel_gain_db(amp, grid, slots[i]));
    out.signal_w[i] *= g;
    out.ase_w[i] = out.ase_w[i] * g + added_ase(g, nf, grid.frequency(slots[i]), constants);
  }
  return out;
}

inline double q_factor(double gsnr_db, double offset_db = 0.0) { return gsnr_db - offset_db; }

// Undefined when the channel is dark; capped when noise vanishes.
template <class T>
std::optional<T> gsnr_db(const T& signal_w, const T& noise_w, double cap_db) {
  if (!(ad::value(signal_w) > 0.0)) return std::nullopt;
  if (!(ad::value(noise_w) > 0.0)) return T(cap_db);
  T g = linear_to_db(signal_w / noise_w);
  if (ad::value(g) > cap_db) return T(cap_db);
  return g;
}

// Accumulators at the receiver plus total power at every amplifier port.
template <class T>
struct Propagation {
  std::vector<int> slots;
  std::vector<T> signal_w, ase_w, nli_w;
  std::vector<T> amp_input_w, amp_output_w;
  std::vector<bool> span_cut;
};

namespace detail {

template <class T>
T total(const std::vector<T>& a, const std::vector<T>& b, const std::vector<T>& c) {
  T s(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] + b[i] + c[i];
  return s;
}

template <class T>
void amplify_in_place(Propagation<T>& p, const Amplifier& amp, const T& nf_db,
                      const ChannelGrid& grid, const PhysicalConstants& c) {
  const T nf = db_to_linear(nf_db);
  for (std::size_t i = 0; i < p.slots.size(); ++i) {
    const double g = db_to_linear(channel_gain_db(amp, grid, p.slots[i]));
    p.signal_w[i] = p.signal_w[i] * g;
    p.nli_w[i] = p.nli_w[i] * g;
    p.ase_w[i] = p.ase_w[i] * g + added_ase(g, nf, grid.frequency(p.slots[i]), c);
  }
}

}  // namespace detail

// The model core. Span extra loss and amplifier noise figure come in as
// scalars of type T (the twin's unknowns); everything else is read from link.
template <class T>
Propagation<T> propagate(const LinkTopology& link, std::span<const double> launch_w,
                         std::span<const T> extra_loss_db, std::span<const T> nf_db) {
  const auto& grid = link.grid;
  const std::size_t n_spans = link.spans.size();
  if (link.amplifiers.size() != n_spans + 2)
    throw ValidationError("amplifier count must equal span count + 2");
  if (extra_loss_db.size() != n_spans || nf_db.size() != link.amplifiers.size())
    throw ValidationError("parameter vectors do not match the topology");
  if (static_cast<int>(launch_w.size()) != grid.slot_count)
    throw ValidationError("launch vector must have one entry per slot");

  Propagation<T> p;
  p.slots = grid.active_slots();
  const int n_active = static_cast<int>(p.slots.size());
  p.signal_w.reserve(n_active);
  for (int s : p.slots) p.signal_w.emplace_back(launch_w[s]);
  p.ase_w.assign(n_active, T(0.0));
  p.nli_w.assign(n_active, T(0.0));
  p.span_cut.assign(n_spans, false);

  auto run_amp = [&](std::size_t k) {
    p.amp_input_w.push_back(detail::total(p.signal_w, p.ase_w, p.nli_w));
    detail::amplify_in_place(p, link.amplifiers[k], nf_db[k], grid, link.constants);
    p.amp_output_w.push_back(detail::total(p.signal_w, p.ase_w, p.nli_w));
  };

  run_amp(0);
  for (std::size_t s = 0; s < n_spans; ++s) {
    const Span& span = link.spans[s];
    p.span_cut[s] = span.is_cut;
    if (span.is_cut) {
      std::fill(p.signal_w.begin(), p.signal_w.end(), T(0.0));
      std::fill(p.ase_w.begin(), p.ase_w.end(), T(0.0));
      std::fill(p.nli_w.begin(), p.nli_w.end(), T(0.0));
    } else {
      for (int i = 0; i < n_active; ++i)
        p.nli_w[i] += nli_power(p.signal_w[i], span, grid, n_active);
      const T t = db_to_linear(-(span.fiber_loss_db() + extra_loss_db[s]));
      for (int i = 0; i < n_active; ++i) {
        p.signal_w[i] *= t;
        p.ase_w[i] *= t;
        p.nli_w[i] *= t;
      }
    }
    run_amp(s + 1);
  }
  run_amp(n_spans + 1);
  return p;
}

struct ChannelReading {
  int slot = 0;
  bool is_real = false;
  double received_power_w = 0.0;
  double ase_power_w = 0.0;  // in the reference bandwidth
  double nli_power_w = 0.0;
  std::optional<double> gsnr_db;
  std::optional<double> q_factor_db;

  bool operator==(const ChannelReading&) const = default;
};

struct LinkSnapshot {
  std::vector<ChannelReading> channels;  // active slots, ascending
  std::vector<double> amp_input_power_w;
  std::vector<double> amp_output_power_w;
  std::vector<bool> span_cut;

  bool any_cut() const { return std::find(span_cut.begin(), span_cut.end(), true) != span_cut.end(); }

  const ChannelReading* find(int slot) const {
    for (const auto& c : channels)
      if (c.slot == slot) return &c;
    return nullptr;
  }

  // Worst Q over transponder-carrying channels; empty if none is defined.
  std::optional<double> min_real_q_db() const {
    std::optional<double> worst;
    for (const auto& c : channels) {
      if (!c.is_real || !c.q_factor_db) continue;
      if (!worst || *c.q_factor_db < *worst) worst = c.q_factor_db;
    }
    return worst;
  }

  bool operator==(const LinkSnapshot&) const = default;
};

inline LinkSnapshot to_snapshot(const LinkTopology& link, const Propagation<double>& p) {
  LinkSnapshot snap;
  snap.amp_input_power_w = p.amp_input_w;
  snap.amp_output_power_w = p.amp_output_w;
  snap.span_cut = p.span_cut;
  for (std::size_t i = 0; i < p.slots.size(); ++i) {
    ChannelReading r;
    r.slot = p.slots[i];
    r.is_real = link.grid.is_real[r.slot];
    r.received_power_w = p.signal_w[i];
    r.ase_power_w = p.ase_w[i];
    r.nli_power_w = p.nli_w[i];
    r.gsnr_db = gsnr_db(p.signal_w[i], p.ase_w[i] + p.nli_w[i], link.gsnr_cap_db);
    if (r.gsnr_db) r.q_factor_db = q_factor(*r.gsnr_db, link.q_offset_db);
    snap.channels.push_back(r);
  }
  return snap;
}

// Evaluates the link with its own amplifier settings and span parameters.
inline LinkSnapshot transmit(const LinkTopology& link, std::span<const double> launch_w) {
  std::vector<double> extra, nf;
  for (const auto& s : link.spans) extra.push_back(s.extra_loss_db);
  for (const auto& a : link.amplifiers) nf.push_back(a.noise_figure_db);
  return to_snapshot(link, propagate<double>(link, launch_w, extra, nf));
}

inline LinkSnapshot transmit(const LinkTopology& link, std::span<const double> launch_w,
                             const GainConfig& config) {
  LinkTopology configured = link;
  configured.apply(config);
  return transmit(configured, launch_w);
}

}  // namespace adon::physics

#endif  // ADON_PHYSICS_PROPAGATION_HPP_
