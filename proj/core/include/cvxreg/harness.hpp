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
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cvxreg/admm.hpp"
#include "cvxreg/interpolant.hpp"
#include "cvxreg/types.hpp"

namespace cvxreg {

/// Deterministic standard-normal sampler (Box-Muller over 53-bit uniforms
/// from mt19937_64), so seeded experiments reproduce across platforms.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double normal();

 private:
  std::mt19937_64 rng_;
};

/// Equispaced sites on [-1, 1] with y_i = x_i^2 + N(0, sigma^2) noise.
ObservationSet synth_quadratic(Eigen::Index n, double sigma, std::uint64_t seed);

inline double quadratic_truth(double x) { return x * x; }

/// Reference solution of the constrained least-squares fit on tiny instances.
struct OracleResult {
  Eigen::VectorXd values;    // f*
  SiteMatrix gradients;      // g*, d x n
  double objective = 0.0;    // sum_i (y_i - f_i*)^2
  double kkt_residual = 0.0;
  double max_violation = 0.0;
  int outer_rounds = 0;
  long newton_iterations = 0;
};

/// Independent oracle for the pairwise-constrained least-squares problem:
/// exterior quadratic penalty on all n(n-1) constraint residuals with penalty
/// doubling (1 up to 1e12), damped Newton with backtracking on each smooth
/// penalized problem. Deliberately self-contained (its residuals, gradients
/// and Hessians are written out inline) so agreement with the ADMM path is
/// evidence rather than tautology. Requires n <= 8; throws
/// OracleNotConvergedError if the tolerances cannot be met.
OracleResult reference_fit_small(const ObservationSet& observations,
                                 const FunctionClass& function_class,
                                 double tol = 1e-6);

/// Mean squared error (1/n_s) sum_s (phi_hat(y_s) - phi(y_s))^2 over an
/// equispaced grid of n_s >= 2 points on [lo, hi], endpoints included.
double error_metric(const Interpolant& interp,
                    const std::function<double(double)>& true_fn, double lo,
                    double hi, int n_s = 1000);

struct ExperimentConfig {
  Eigen::Index n = 25;
  Eigen::Index d = 1;
  double noise_sigma = 0.1;
  FunctionClass function_class{1.0, 5.0};
  AdmmConfig admm;
  std::uint64_t seed = 0;
  bool gp_warm_start = true;
  double grid_lo = -1.0;
  double grid_hi = 1.0;
  int grid_points = 1000;
  std::string method_tag = "admm";
};

struct BenchRecord {
  int n = 0;
  std::string method;
  long iters = 0;
  double residual = 0.0;
  double time_total_s = 0.0;
  double time_per_iter_s = 0.0;  // median over iterations after warm-up
  double e_metric = 0.0;
  long edge_count = 0;
};

/// Runs one fit per config and measures solver-phase wall time (data
/// generation and warm start excluded); per-iteration time is the median
/// over at least 5 post-warm-up iterations when available.
std::vector<BenchRecord> bench_scaling(const std::vector<ExperimentConfig>& configs);

}  // namespace cvxreg
