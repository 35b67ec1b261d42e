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

#ifndef ADON_CORE_UNITS_HPP_
#define ADON_CORE_UNITS_HPP_

#include <cmath>
#include <limits>

namespace adon {

// Generic over the scalar so the same conversions work on AD types.
template <class T>
T db_to_linear(const T& db) {
  using std::pow;
  return pow(10.0, db / 10.0);
}

template <class T>
T linear_to_db(const T& lin) {
  using std::log10;
  return 10.0 * log10(lin);
}

inline double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

// -inf for a dark port; callers clamp where a floor is meaningful.
inline double watts_to_dbm(double w) {
  if (w <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(w / 1e-3);
}

}  // namespace adon

#endif  // ADON_CORE_UNITS_HPP_
