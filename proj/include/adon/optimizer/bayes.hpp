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

#ifndef ADON_OPTIMIZER_BAYES_HPP_
#define ADON_OPTIMIZER_BAYES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "adon/core/error.hpp"
#include "adon/core/gain_config.hpp"
#include "adon/optimizer/environment.hpp"

namespace adon::opt {

class GPNumericalFailure : public Error {
 public:
  using Error::Error;
};

struct GpOptions {
  double length_scale = 0.3;  // in normalized input units
  double noise_std = 0.1;     // observation noise, output units
};

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

// Exact GP posterior with a squared-exponential kernel and fixed
// hyperparameters. Outputs are standardized internally; the signal variance
// equals the sample variance of y.
class GaussianProcess {
 public:
  GaussianProcess(std::vector<std::vector<double>> x, std::span<const double> y, GpOptions opt = {})
      : x_(std::move(x)), opt_(opt) {
    const auto n = static_cast<Eigen::Index>(x_.size());
    if (n == 0 || y.size() != x_.size()) throw ValidationError("GP needs matching, non-empty samples");
    mean_ = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : y) ss += (v - mean_) * (v - mean_);
    scale_ = std::sqrt(ss / static_cast<double>(n));
    if (!(scale_ > 1e-12)) scale_ = 1.0;
    const double noise = (opt_.noise_std / scale_) * (opt_.noise_std / scale_);

    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) K(i, j) = kernel(x_[i], x_[j]);
    K.diagonal().array() += noise;

    Eigen::VectorXd yt(n);
    for (Eigen::Index i = 0; i < n; ++i) yt[i] = (y[i] - mean_) / scale_;

    for (double jitter = 0.0;; jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0) {
      if (jitter > 1e-4 * (1.0 + 1e-9)) throw GPNumericalFailure("GP covariance is not positive definite");
      Eigen::MatrixXd Kj = K;
      Kj.diagonal().array() += jitter;
      chol_.compute(Kj);
      if (chol_.info() == Eigen::Success) break;
    }
    alpha_ = chol_.solve(yt);
  }

  GpPrediction predict(std::span<const double> q) const {
    const auto n = static_cast<Eigen::Index>(x_.size());
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) k[i] = kernel(x_[i], q);
    const Eigen::VectorXd v = chol_.matrixL().solve(k);
    double var = 1.0 - v.squaredNorm();
    if (var < 1e-9) var = 0.0;  // below what the factorization can resolve
    return {mean_ + scale_ * k.dot(alpha_), scale_ * scale_ * var};
  }

  double prior_mean() const { return mean_; }
  double prior_variance() const { return scale_ * scale_; }

 private:
  double kernel(std::span<const double> a, std::span<const double> b) const {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return std::exp(-d2 / (2.0 * opt_.length_scale * opt_.length_scale));
  }

  std::vector<std::vector<double>> x_;
  GpOptions opt_;
  double mean_ = 0.0;
  double scale_ = 1.0;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
};

inline std::vector<GpPrediction> gp_regress(const std::vector<std::vector<double>>& x,
                                            std::span<const double> y,
                                            const std::vector<std::vector<double>>& queries,
                                            GpOptions opt = {}) {
  const GaussianProcess gp(x, y, opt);
  std::vector<GpPrediction> out;
  for (const auto& q : queries) out.push_back(gp.predict(q));
  return out;
}

// Expected improvement over `best` for maximization.
inline double expected_improvement(const GpPrediction& p, double best) {
  const double gap = p.mean - best;
  if (p.variance <= 0.0) return std::max(gap, 0.0);
  const double sd = std::sqrt(p.variance);
  const double z = gap / sd;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return std::max(gap * cdf + sd * pdf, 0.0);
}

struct BayesOptOptions {
  int budget = 50;
  int n_init = 10;
  std::uint64_t seed = 0;
  int candidates = 1000;
  int refine_iterations = 20;
  double refine_step = 0.05;  // normalized units
  GpOptions gp;
};

struct BoxTrace {
  std::vector<std::vector<double>> x;  // in problem units
  std::vector<double> y;
};

// Maximizes f over the box [lo, hi]. Inputs are mapped to [0, 1]^d for the
// surrogate.
inline BoxTrace bayes_opt_box(const std::function<double(std::span<const double>)>& f,
                              std::span<const double> lo, std::span<const double> hi,
                              const BayesOptOptions& opt = {}) {
  const std::size_t d = lo.size();
  if (d == 0 || hi.size() != d) throw ValidationError("search box needs matching bounds");
  if (opt.n_init < 1 || opt.budget <= opt.n_init)
    throw ValidationError("budget must exceed the initial design size");
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  BoxTrace trace;
  std::vector<std::vector<double>> unit;
  auto run = [&](const std::vector<double>& z) {
    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = lo[i] + z[i] * (hi[i] - lo[i]);
    trace.y.push_back(f(x));
    trace.x.push_back(std::move(x));
    unit.push_back(z);
  };

  // Latin hypercube: one point per stratum in every dimension.
  const auto n0 = static_cast<std::size_t>(opt.n_init);
  std::vector<std::vector<double>> design(n0, std::vector<double>(d));
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<std::size_t> perm(n0);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t j = 0; j < n0; ++j)
      design[j][i] = (static_cast<double>(perm[j]) + u(rng)) / static_cast<double>(n0);
  }
  for (const auto& z : design) run(z);

  while (trace.y.size() < static_cast<std::size_t>(opt.budget)) {
    const GaussianProcess gp(unit, trace.y, opt.gp);
    const double best = *std::max_element(trace.y.begin(), trace.y.end());
    auto ei = [&](const std::vector<double>& z) { return expected_improvement(gp.predict(z), best); };

    std::vector<double> zbest;
    double ebest = -1.0;
    for (int c = 0; c < opt.candidates; ++c) {
      std::vector<double> z(d);
      for (auto& v : z) v = u(rng);
      const double e = ei(z);
      if (e > ebest) {
        ebest = e;
        zbest = std::move(z);
      }
    }
    double step = opt.refine_step;
    for (int it = 0; it < opt.refine_iterations; ++it) {
      std::vector<double> move;
      double emove = ebest;
      for (std::size_t i = 0; i < d; ++i)
        for (double dir : {1.0, -1.0}) {
          auto z = zbest;
          z[i] = std::clamp(z[i] + dir * step, 0.0, 1.0);
          const double e = ei(z);
          if (e > emove) {
            emove = e;
            move = std::move(z);
          }
        }
      if (move.empty()) {
        step /= 2.0;
      } else {
        zbest = std::move(move);
        ebest = emove;
      }
    }
    run(zbest);
  }
  return trace;
}

// Which coordinates of a GainConfig the search moves, and over what range.
struct SearchDimension {
  std::size_t coordinate = 0;  // < 6 gain, 6..11 tilt
  double lo = 0.0;
  double hi = 0.0;
};

struct SearchSpace {
  GainConfig base;
  std::vector<SearchDimension> dims;

  static SearchSpace gains(double lo = 14.0, double hi = 22.0) {
    SearchSpace s;
    s.base = GainConfig::flat(18.0);
    for (std::size_t k = 0; k < kAmplifierCount; ++k) s.dims.push_back({k, lo, hi});
    return s;
  }

  GainConfig at(std::span<const double> x) const {
    GainConfig c = base;
    for (std::size_t i = 0; i < dims.size(); ++i) {
      const auto k = dims[i].coordinate;
      (k < kAmplifierCount ? c.gains_db[k] : c.tilts_db[k - kAmplifierCount]) = x[i];
    }
    return c;
  }
};

inline OptimizerReport bayes_opt(Environment& env, const SearchSpace& space,
                                 const BayesOptOptions& opt = {}) {
  Recorder rec(env, "bo");
  std::vector<double> lo, hi;
  for (const auto& d : space.dims) {
    lo.push_back(d.lo);
    hi.push_back(d.hi);
  }
  bayes_opt_box([&](std::span<const double> x) { return rec(space.at(x)); }, lo, hi, opt);
  return rec.finish();
}

}  // namespace adon::opt

#endif  // ADON_OPTIMIZER_BAYES_HPP_
