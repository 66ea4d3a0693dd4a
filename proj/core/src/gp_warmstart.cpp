// Copyright 2026 The cvxreg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cvxreg/gp_warmstart.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <vector>

#include "cvxreg/errors.hpp"

namespace cvxreg {

namespace {

Eigen::MatrixXd kernel_matrix(const SiteMatrix& points, double lengthscale,
                              double signal_var) {
  const Eigen::Index n = points.cols();
  Eigen::MatrixXd k(n, n);
  const double inv = 1.0 / (2.0 * lengthscale * lengthscale);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = signal_var;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double sq = (points.col(i) - points.col(j)).squaredNorm();
      k(i, j) = k(j, i) = signal_var * std::exp(-sq * inv);
    }
  }
  return k;
}

}  // namespace

GpModel gp_fit(const ObservationSet& observations, double lengthscale,
               double signal_var, double noise_var) {
  if (!(lengthscale > 0.0) || !(signal_var > 0.0) || noise_var < 0.0) {
    throw Error("GP hyperparameters must satisfy lengthscale > 0, "
                "signal_var > 0, noise_var >= 0");
  }
  const Eigen::Index n = observations.n();
  Eigen::MatrixXd system =
      kernel_matrix(observations.points(), lengthscale, signal_var);
  system.diagonal().array() += noise_var;

  double jitter = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  while (llt.info() != Eigen::Success) {
    jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
    if (jitter > 1e-6) {
      throw FactorizationFailedError(
          "kernel matrix not positive-definite even with jitter 1e-6");
    }
    Eigen::MatrixXd bumped = system;
    bumped.diagonal().array() += jitter;
    llt.compute(bumped);
  }

  GpModel model;
  model.points_ = observations.points();
  model.alpha_ = llt.solve(observations.values());
  model.lengthscale_ = lengthscale;
  model.signal_var_ = signal_var;
  model.noise_var_ = noise_var;
  model.jitter_ = jitter;
  (void)n;
  return model;
}

std::pair<double, Eigen::VectorXd> gp_mean_and_derivative(const GpModel& model,
                                                          const Eigen::VectorXd& x) {
  const Eigen::Index d = model.points_.rows();
  if (x.size() != d) {
    throw DimensionMismatchError("GP query point dimension disagrees");
  }
  const double inv = 1.0 / (2.0 * model.lengthscale_ * model.lengthscale_);
  double mean = 0.0;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < model.points_.cols(); ++i) {
    const Eigen::VectorXd diff = x - model.points_.col(i);
    const double k = model.signal_var_ * std::exp(-diff.squaredNorm() * inv);
    mean += model.alpha_[i] * k;
    grad -= model.alpha_[i] * k / (model.lengthscale_ * model.lengthscale_) * diff;
  }
  return {mean, grad};
}

Eigen::MatrixXd initial_consensus(const ObservationSet& observations,
                                  const GpConfig& config) {
  double lengthscale;
  if (config.lengthscale.has_value()) {
    lengthscale = *config.lengthscale;
  } else {
    std::vector<double> dists;
    const Eigen::Index n = observations.n();
    dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        dists.push_back((observations.site(i) - observations.site(j)).norm());
      }
    }
    std::sort(dists.begin(), dists.end());
    lengthscale = dists[dists.size() / 2];
  }

  double signal_var;
  if (config.signal_var.has_value()) {
    signal_var = *config.signal_var;
  } else {
    const double mean = observations.values().mean();
    signal_var = (observations.values().array() - mean).square().sum() /
                 static_cast<double>(observations.n());
    if (!(signal_var > 0.0)) signal_var = 1.0;  // constant data
  }
  const double noise_var = config.noise_var.value_or(0.01 * signal_var);

  const GpModel model = gp_fit(observations, lengthscale, signal_var, noise_var);
  Eigen::MatrixXd z(1 + observations.d(), observations.n());
  for (Eigen::Index i = 0; i < observations.n(); ++i) {
    const auto [value, grad] = gp_mean_and_derivative(model, observations.site(i));
    z(0, i) = value;
    z.col(i).tail(observations.d()) = grad;
  }
  return z;
}

}  // namespace cvxreg
