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

#ifndef ADON_CORE_GAIN_CONFIG_HPP_
#define ADON_CORE_GAIN_CONFIG_HPP_

#include <algorithm>
#include <array>
#include <charconv>
#include <compare>
#include <cstddef>
#include <string>

#include "adon/core/error.hpp"

namespace adon {

inline constexpr std::size_t kAmplifierCount = 6;
inline constexpr std::size_t kSpanCount = 4;

inline constexpr double kMinGainDb = 10.0;
inline constexpr double kMaxGainDb = 25.0;
inline constexpr double kMinTiltDb = -3.0;
inline constexpr double kMaxTiltDb = 3.0;

// Shortest decimal text that parses back to exactly the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

// Gain and tilt per amplifier, in chain order (booster, 4 inline, preamp).
// Ordered lexicographically (gains, then tilts) so argmax ties break
// deterministically.
struct GainConfig {
  std::array<double, kAmplifierCount> gains_db{};
  std::array<double, kAmplifierCount> tilts_db{};

  static GainConfig flat(double gain_db) {
    GainConfig c;
    c.gains_db.fill(gain_db);
    return c;
  }

  bool in_bounds() const {
    return std::all_of(gains_db.begin(), gains_db.end(),
                       [](double g) { return g >= kMinGainDb && g <= kMaxGainDb; }) &&
           std::all_of(tilts_db.begin(), tilts_db.end(),
                       [](double t) { return t >= kMinTiltDb && t <= kMaxTiltDb; });
  }

  void validate() const {
    for (std::size_t i = 0; i < kAmplifierCount; ++i) {
      if (!(gains_db[i] >= kMinGainDb && gains_db[i] <= kMaxGainDb)) {
        throw ValidationError("amplifier " + std::to_string(i) + " gain " +
                              format_double(gains_db[i]) + " dB outside [10, 25]");
      }
      if (!(tilts_db[i] >= kMinTiltDb && tilts_db[i] <= kMaxTiltDb)) {
        throw ValidationError("amplifier " + std::to_string(i) + " tilt " +
                              format_double(tilts_db[i]) + " dB outside [-3, 3]");
      }
    }
  }

  GainConfig clamped() const {
    GainConfig c = *this;
    for (auto& g : c.gains_db) g = std::clamp(g, kMinGainDb, kMaxGainDb);
    for (auto& t : c.tilts_db) t = std::clamp(t, kMinTiltDb, kMaxTiltDb);
    return c;
  }

  // "g0,g1,...,g5" with shortest round-trip formatting.
  static std::string join(const std::array<double, kAmplifierCount>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ',';
      out += format_double(v[i]);
    }
    return out;
  }

  std::string to_string() const {
    return "gains=[" + join(gains_db) + "] tilts=[" + join(tilts_db) + "]";
  }

  auto operator<=>(const GainConfig&) const = default;
  bool operator==(const GainConfig&) const = default;
};

}  // namespace adon

#endif  // ADON_CORE_GAIN_CONFIG_HPP_
