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

#ifndef ADON_TWIN_TWIN_HPP_
#define ADON_TWIN_TWIN_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "adon/core/dual.hpp"
#include "adon/core/error.hpp"
#include "adon/core/gain_config.hpp"
#include "adon/core/units.hpp"
#include "adon/physics/link.hpp"
#include "adon/physics/propagation.hpp"
#include "adon/telemetry/record.hpp"

namespace adon::twin {

inline constexpr std::size_t kParamCount = kSpanCount + kAmplifierCount;
inline constexpr double kMinNfDb = 3.0;
inline constexpr double kMaxNfDb = 10.0;
inline constexpr const char* kSchema = "adon.twin/1";

class SingularUpdate : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

// The twin's unknowns. Layout of the flat vector: span losses, then NFs.
struct TwinParameters {
  std::array<double, kSpanCount> extra_loss_db{};
  std::array<double, kAmplifierCount> nf_db{5.0, 5.0, 5.0, 5.0, 5.0, 5.0};

  std::array<double, kParamCount> flat() const {
    std::array<double, kParamCount> v{};
    std::copy(extra_loss_db.begin(), extra_loss_db.end(), v.begin());
    std::copy(nf_db.begin(), nf_db.end(), v.begin() + kSpanCount);
    return v;
  }

  static TwinParameters from_flat(std::span<const double> v) {
    TwinParameters p;
    std::copy(v.begin(), v.begin() + kSpanCount, p.extra_loss_db.begin());
    std::copy(v.begin() + kSpanCount, v.begin() + kParamCount, p.nf_db.begin());
    return p;
  }

  TwinParameters clamped() const {
    TwinParameters p = *this;
    for (auto& x : p.extra_loss_db) x = std::max(x, 0.0);
    for (auto& x : p.nf_db) x = std::clamp(x, kMinNfDb, kMaxNfDb);
    return p;
  }

  bool operator==(const TwinParameters&) const = default;
};

inline nlohmann::json to_json(const TwinParameters& p) {
  return {{"schema", kSchema}, {"extra_loss_db", p.extra_loss_db}, {"nf_db", p.nf_db}};
}

inline TwinParameters twin_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("schema", "") != kSchema)
    throw ValidationError(std::string("twin state must carry schema ") + kSchema);
  TwinParameters p;
  const auto loss = j.at("extra_loss_db").get<std::vector<double>>();
  const auto nf = j.at("nf_db").get<std::vector<double>>();
  if (loss.size() != kSpanCount || nf.size() != kAmplifierCount)
    throw ValidationError("twin state has the wrong parameter count");
  std::copy(loss.begin(), loss.end(), p.extra_loss_db.begin());
  std::copy(nf.begin(), nf.end(), p.nf_db.begin());
  if (!(p.clamped() == p)) throw ValidationError("twin parameters out of range");
  return p;
}

// Nominal plant with the occupancy, settings and cut flags a record was taken under.
inline physics::LinkTopology link_for(const physics::LinkTopology& nominal,
                                      const telemetry::TelemetryRecord& r) {
  physics::LinkTopology link = nominal;
  link.grid.active = r.active;
  link.grid.is_real = r.real;
  link.apply(r.config);
  for (std::size_t s = 0; s < kSpanCount; ++s) link.spans[s].is_cut = !r.osc_alive[s];
  return link;
}

inline physics::LinkSnapshot predict(const TwinParameters& twin,
                                     const physics::LinkTopology& nominal,
                                     const GainConfig& config, const physics::ChannelGrid& grid) {
  physics::LinkTopology link = nominal;
  link.grid = grid;
  link.apply(config);
  for (std::size_t s = 0; s < kSpanCount; ++s) link.spans[s].extra_loss_db = twin.extra_loss_db[s];
  for (std::size_t k = 0; k < kAmplifierCount; ++k)
    link.amplifiers[k].noise_figure_db = twin.nf_db[k];
  return physics::transmit(link, physics::uniform_launch(grid, link.launch_power_dbm));
}

struct ResidualWeights {
  double power = 1.0;
  double q = 1.0;
};

namespace detail {

// What the twin is asked to reproduce for one record: the twelve amplifier
// port powers and the Q of each real channel.
struct Observation {
  std::vector<double> values;      // dB / dBm
  std::vector<int> q_slots;        // slots of the trailing Q entries
};

inline bool usable(const telemetry::TelemetryRecord& r) {
  if (!r.all_osc_alive()) return false;
  for (std::size_t k = 0; k < kAmplifierCount; ++k)
    if (r.amp_in_dbm[k] <= telemetry::kPowerFloorDbm || r.amp_out_dbm[k] <= telemetry::kPowerFloorDbm)
      return false;
  return true;
}

inline Observation observe(const telemetry::TelemetryRecord& r) {
  Observation o;
  for (double p : r.amp_in_dbm) o.values.push_back(p);
  for (double p : r.amp_out_dbm) o.values.push_back(p);
  for (std::size_t slot = 0; slot < r.q_db.size(); ++slot) {
    if (!r.q_db[slot]) continue;
    o.values.push_back(*r.q_db[slot]);
    o.q_slots.push_back(static_cast<int>(slot));
  }
  return o;
}

// Model outputs in the same order as Observation::values.
template <class T>
std::vector<T> model_outputs(const physics::LinkTopology& link, std::span<const T> params,
                             const std::vector<int>& q_slots) {
  const auto launch = physics::uniform_launch(link.grid, link.launch_power_dbm);
  const auto p = physics::propagate<T>(link, launch, params.first(kSpanCount),
                                       params.subspan(kSpanCount, kAmplifierCount));
  std::vector<T> out;
  out.reserve(2 * kAmplifierCount + q_slots.size());
  for (const auto& w : p.amp_input_w) out.push_back(linear_to_db(w) + 30.0);
  for (const auto& w : p.amp_output_w) out.push_back(linear_to_db(w) + 30.0);
  for (int slot : q_slots) {
    const auto it = std::find(p.slots.begin(), p.slots.end(), slot);
    if (it == p.slots.end()) throw ValidationError("Q reported on an inactive slot");
    const std::size_t i = static_cast<std::size_t>(it - p.slots.begin());
    const auto g = physics::gsnr_db(p.signal_w[i], p.ase_w[i] + p.nli_w[i], link.gsnr_cap_db);
    if (!g) throw ValidationError("Q reported on a dark channel");
    out.push_back(*g - link.q_offset_db);
  }
  return out;
}

// Records grouped by the inputs that determine the prediction, so identical
// operating points are propagated once.
struct Problem {
  struct Group {
    physics::LinkTopology link;
    std::vector<int> q_slots;
    std::vector<std::vector<double>> observed;
  };
  std::vector<Group> groups;
  ResidualWeights weights;
  std::size_t records = 0;
  std::size_t distinct_configs = 0;

  Problem(const physics::LinkTopology& nominal, std::span<const telemetry::TelemetryRecord> recs,
          ResidualWeights w)
      : weights(w) {
    std::map<std::tuple<GainConfig, std::vector<bool>, std::vector<bool>, std::vector<int>>, std::size_t>
        index;
    std::vector<GainConfig> configs;
    for (const auto& r : recs) {
      if (!usable(r)) continue;
      Observation o = observe(r);
      auto key = std::make_tuple(r.config, r.active, r.real, o.q_slots);
      auto [it, inserted] = index.try_emplace(key, groups.size());
      if (inserted) groups.push_back({link_for(nominal, r), o.q_slots, {}});
      groups[it->second].observed.push_back(std::move(o.values));
      if (std::find(configs.begin(), configs.end(), r.config) == configs.end())
        configs.push_back(r.config);
      ++records;
    }
    distinct_configs = configs.size();
  }

  double weight(std::size_t row) const { return row < 2 * kAmplifierCount ? weights.power : weights.q; }

  std::size_t residual_count() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.observed.size() * (2 * kAmplifierCount + g.q_slots.size());
    return n;
  }

  // Weighted residuals (predicted - observed) in record order within groups.
  Eigen::VectorXd residuals(const std::array<double, kParamCount>& x) const {
    Eigen::VectorXd r(residual_count());
    Eigen::Index row = 0;
    for (const auto& g : groups) {
      const auto pred = model_outputs<double>(g.link, std::span<const double>(x), g.q_slots);
      for (const auto& obs : g.observed)
        for (std::size_t i = 0; i < obs.size(); ++i)
          r[row++] = std::sqrt(weight(i)) * (pred[i] - obs[i]);
    }
    return r;
  }

  Eigen::MatrixXd jacobian(const std::array<double, kParamCount>& x) const {
    using D = ad::Dual<kParamCount>;
    std::array<D, kParamCount> xd;
    for (std::size_t i = 0; i < kParamCount; ++i) xd[i] = D::variable(x[i], i);
    Eigen::MatrixXd J(residual_count(), kParamCount);
    Eigen::Index row = 0;
    for (const auto& g : groups) {
      const auto pred = model_outputs<D>(g.link, std::span<const D>(xd), g.q_slots);
      for (const auto& obs : g.observed)
        for (std::size_t i = 0; i < obs.size(); ++i, ++row)
          for (std::size_t j = 0; j < kParamCount; ++j)
            J(row, static_cast<Eigen::Index>(j)) = std::sqrt(weight(i)) * pred[i].d[j];
    }
    return J;
  }
};

inline std::array<double, kParamCount> clamp_flat(std::array<double, kParamCount> x) {
  return TwinParameters::from_flat(x).clamped().flat();
}

}  // namespace detail

// Residual vector and its exact Jacobian, exposed for gradient checks.
inline Eigen::VectorXd fit_residuals(const TwinParameters& twin, const physics::LinkTopology& nominal,
                                     std::span<const telemetry::TelemetryRecord> records,
                                     ResidualWeights w = {}) {
  return detail::Problem(nominal, records, w).residuals(twin.flat());
}

inline Eigen::MatrixXd fit_jacobian(const TwinParameters& twin, const physics::LinkTopology& nominal,
                                    std::span<const telemetry::TelemetryRecord> records,
                                    ResidualWeights w = {}) {
  return detail::Problem(nominal, records, w).jacobian(twin.flat());
}

struct FitOptions {
  int max_iterations = 200;
  double step_tolerance_db = 1e-4;
  double initial_damping = 1e-3;
  std::size_t min_records = 20;
  ResidualWeights weights;
};

struct FitReport {
  int iterations = 0;
  double residual_rmse_db = 0.0;
  std::array<double, kParamCount> deltas{};
  bool converged = false;
  std::size_t records_used = 0;
  std::vector<double> cost_trace;  // objective after each accepted iteration
};

// Projected Levenberg-Marquardt. Updates `twin` in place unless the data
// cannot identify the parameters (a single operating configuration), in
// which case it reports non-convergence and leaves the twin untouched.
inline FitReport fit(TwinParameters& twin, const physics::LinkTopology& nominal,
                     std::span<const telemetry::TelemetryRecord> records,
                     const FitOptions& opt = {}) {
  const detail::Problem problem(nominal, records, opt.weights);
  if (problem.records < opt.min_records)
    throw InsufficientData("twin fit needs " + std::to_string(opt.min_records) +
                           " healthy records, have " + std::to_string(problem.records));
  FitReport report;
  report.records_used = problem.records;

  auto x = detail::clamp_flat(twin.flat());
  Eigen::VectorXd r = problem.residuals(x);
  double cost = r.squaredNorm();
  report.cost_trace.push_back(cost);
  auto finish = [&](bool converged) {
    report.converged = converged;
    report.residual_rmse_db = std::sqrt(cost / static_cast<double>(r.size()));
    return report;
  };
  if (problem.distinct_configs < 2) return finish(false);

  const auto start = x;
  double lambda = opt.initial_damping;
  int failed_solves = 0;
  while (report.iterations < opt.max_iterations) {
    ++report.iterations;
    const Eigen::MatrixXd J = problem.jacobian(x);
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    bool accepted = false;
    double step_norm = 0.0;
    while (lambda < 1e12) {
      Eigen::MatrixXd A = JtJ;
      for (Eigen::Index i = 0; i < A.rows(); ++i) A(i, i) += lambda * std::max(JtJ(i, i), 1e-9);
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
      Eigen::VectorXd delta = ldlt.solve(-g);
      if (ldlt.info() != Eigen::Success || !delta.allFinite()) {
        if (++failed_solves > 20) throw SingularUpdate("twin normal equations stay singular");
        lambda *= 10.0;
        continue;
      }
      std::array<double, kParamCount> trial;
      for (std::size_t i = 0; i < kParamCount; ++i) trial[i] = x[i] + delta[static_cast<Eigen::Index>(i)];
      trial = detail::clamp_flat(trial);
      step_norm = 0.0;
      for (std::size_t i = 0; i < kParamCount; ++i) step_norm += (trial[i] - x[i]) * (trial[i] - x[i]);
      step_norm = std::sqrt(step_norm);
      const Eigen::VectorXd rt = problem.residuals(trial);
      const double ct = rt.squaredNorm();
      if (ct <= cost) {
        x = trial;
        r = rt;
        cost = ct;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        break;
      }
      if (step_norm < opt.step_tolerance_db) break;
      lambda *= 10.0;
    }
    if (accepted) report.cost_trace.push_back(cost);
    if (!accepted || step_norm < opt.step_tolerance_db) {
      for (std::size_t i = 0; i < kParamCount; ++i) report.deltas[i] = x[i] - start[i];
      twin = TwinParameters::from_flat(x);
      return finish(true);
    }
  }
  for (std::size_t i = 0; i < kParamCount; ++i) report.deltas[i] = x[i] - start[i];
  twin = TwinParameters::from_flat(x);
  return finish(false);
}

// Root mean square Q error over every real channel of every record.
inline double rmse(const TwinParameters& twin, const physics::LinkTopology& nominal,
                   std::span<const telemetry::TelemetryRecord> dataset) {
  double sum = 0.0;
  std::size_t n = 0;
  std::map<std::tuple<GainConfig, std::vector<bool>, std::vector<bool>>, physics::LinkSnapshot> cache;
  for (const auto& r : dataset) {
    if (!r.all_osc_alive()) continue;
    auto key = std::make_tuple(r.config, r.active, r.real);
    auto it = cache.find(key);
    if (it == cache.end()) {
      physics::ChannelGrid grid = nominal.grid;
      grid.active = r.active;
      grid.is_real = r.real;
      it = cache.emplace(key, predict(twin, nominal, r.config, grid)).first;
    }
    for (std::size_t slot = 0; slot < r.q_db.size(); ++slot) {
      if (!r.q_db[slot]) continue;
      const auto* c = it->second.find(static_cast<int>(slot));
      if (!c || !c->q_factor_db) continue;
      const double e = *c->q_factor_db - *r.q_db[slot];
      sum += e * e;
      ++n;
    }
  }
  if (n == 0) throw EmptyDataset("no Q observations to score");
  return std::sqrt(sum / static_cast<double>(n));
}

struct SyncOptions {
  double damping = 1.0;       // ridge on the normal equations, dB^-2
  double relaxation = 0.5;    // fraction of the Gauss-Newton step taken
  double max_step_db = 0.2;
  ResidualWeights weights;
};

// One damped Gauss-Newton step against a single record. Records taken while
// any span is dark are ignored.
inline TwinParameters sync(const TwinParameters& twin, const physics::LinkTopology& nominal,
                           const telemetry::TelemetryRecord& record, const SyncOptions& opt = {}) {
  const detail::Problem problem(nominal, std::span(&record, 1), opt.weights);
  if (problem.records == 0) return twin;
  const auto x = twin.flat();
  const Eigen::VectorXd r = problem.residuals(x);
  const Eigen::MatrixXd J = problem.jacobian(x);
  Eigen::MatrixXd A = J.transpose() * J;
  A.diagonal().array() += opt.damping;
  const Eigen::VectorXd delta = A.ldlt().solve(-(J.transpose() * r));
  if (!delta.allFinite()) return twin;
  std::array<double, kParamCount> next;
  for (std::size_t i = 0; i < kParamCount; ++i)
    next[i] = x[i] + std::clamp(opt.relaxation * delta[static_cast<Eigen::Index>(i)],
                                -opt.max_step_db, opt.max_step_db);
  return TwinParameters::from_flat(next).clamped();
}

}  // namespace adon::twin

#endif  // ADON_TWIN_TWIN_HPP_
