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

#pragma once

#include <Eigen/Core>
#include <optional>
#include <utility>

#include "cvxreg/types.hpp"

namespace cvxreg {

/// Hyperparameters for the squared-exponential kernel
///   k(u, v) = signal_var * exp(-|u - v|^2 / (2 lengthscale^2)).
/// Unset fields fall back to standard heuristics: lengthscale = median
/// pairwise site distance, signal_var = var(y), noise_var = 0.01 signal_var.
struct GpConfig {
  std::optional<double> lengthscale;
  std::optional<double> signal_var;
  std::optional<double> noise_var;
};

/// Posterior-mean regressor with a factorized kernel system.
class GpModel {
 public:
  double lengthscale() const { return lengthscale_; }
  double signal_var() const { return signal_var_; }
  double noise_var() const { return noise_var_; }
  /// Jitter added to make the factorization succeed; 0 when none was needed.
  double jitter() const { return jitter_; }
  const SiteMatrix& train_points() const { return points_; }

  friend GpModel gp_fit(const ObservationSet& observations, double lengthscale,
                        double signal_var, double noise_var);
  friend std::pair<double, Eigen::VectorXd> gp_mean_and_derivative(
      const GpModel& model, const Eigen::VectorXd& x);

 private:
  SiteMatrix points_;
  Eigen::VectorXd alpha_;  // (K + noise I)^{-1} y
  double lengthscale_ = 1.0;
  double signal_var_ = 1.0;
  double noise_var_ = 0.0;
  double jitter_ = 0.0;
};

/// Fits the kernel system (K + noise_var I) alpha = y with a Cholesky
/// factorization, escalating jitter from 1e-10 to 1e-6 if needed; throws
/// FactorizationFailedError when even the largest jitter fails.
GpModel gp_fit(const ObservationSet& observations, double lengthscale,
               double signal_var, double noise_var);

/// Posterior mean, and its analytic gradient through the kernel derivative.
std::pair<double, Eigen::VectorXd> gp_mean_and_derivative(const GpModel& model,
                                                          const Eigen::VectorXd& x);

/// Consensus initializer: z_i = (m(x_i), grad m(x_i)) per site, as a
/// (1+d) x n matrix with the value slot first.
Eigen::MatrixXd initial_consensus(const ObservationSet& observations,
                                  const GpConfig& config = {});

}  // namespace cvxreg
