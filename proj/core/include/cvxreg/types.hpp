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
#include <vector>

#include "cvxreg/errors.hpp"

namespace cvxreg {

/// Sites are stored one per column (d x n), so site(i) is a contiguous view.
using SiteMatrix = Eigen::MatrixXd;

inline constexpr double kDuplicateSiteTol = 1e-12;
inline constexpr double kDefaultFeasibilityTol = 1e-6;

/// The class of mu-strongly convex, L-smooth functions, 0 <= mu < L <= inf.
///
/// An infinite L is a distinguished state, never an IEEE infinity fed into
/// arithmetic: every coefficient involving 1/L or mu/L is branch-specialized
/// so the nonsmooth limit is exact.
class FunctionClass {
 public:
  /// Finite-L class. Throws InvalidClassError unless 0 <= mu < L.
  FunctionClass(double mu, double L);

  /// Nonsmooth class (L = inf). Requires mu >= 0.
  static FunctionClass with_infinite_L(double mu);

  double mu() const { return mu_; }
  bool has_finite_L() const { return finite_L_; }

  /// Smoothness constant; throws InfiniteLError when L = inf.
  double L() const;

  /// Coefficients of the pairwise interpolability inequality, written as
  ///   f_i - f_j - g_j'(x_i - x_j)
  ///     - grad_sq*|g_i - g_j|^2 - site_sq*|x_i - x_j|^2
  ///     - cross*(g_i - g_j)'(x_i - x_j)  >=  0.
  /// For finite L: grad_sq = 1/(2(L-mu)), site_sq = mu*L/(2(L-mu)),
  /// cross = -mu/(L-mu). For L = inf: grad_sq = 0, site_sq = mu/2, cross = 0.
  struct PairCoefficients {
    double grad_sq;
    double site_sq;
    double cross;
  };
  PairCoefficients pair_coefficients() const;

  bool operator==(const FunctionClass& other) const;

 private:
  FunctionClass(double mu, double L, bool finite);

  double mu_;
  double L_;  // meaningful only when finite_L_
  bool finite_L_;
};

/// Validated sample set: n distinct d-dimensional sites with scalar values.
class ObservationSet {
 public:
  /// Validating constructor; points is d x n, one site per column.
  ObservationSet(SiteMatrix points, Eigen::VectorXd values);

  Eigen::Index n() const { return points_.cols(); }
  Eigen::Index d() const { return points_.rows(); }
  const SiteMatrix& points() const { return points_; }
  const Eigen::VectorXd& values() const { return values_; }
  auto site(Eigen::Index i) const { return points_.col(i); }
  double value(Eigen::Index i) const { return values_[i]; }

 private:
  SiteMatrix points_;
  Eigen::VectorXd values_;
};

/// Validates raw row-per-observation input.
/// Throws DimensionMismatchError on ragged points or length mismatch,
/// TooFewPointsError for n < 2, DuplicateSiteError when two sites coincide
/// within kDuplicateSiteTol in the max norm.
ObservationSet validate_observations(const std::vector<std::vector<double>>& points,
                                     const std::vector<double>& values);

/// Per-site decision triplets (x_i, g_i, f_i) together with their class.
/// `certified` starts false and is set only by a passing feasibility check.
class CertifiedModel {
 public:
  CertifiedModel(SiteMatrix sites, Eigen::VectorXd values, SiteMatrix gradients,
                 FunctionClass function_class);

  Eigen::Index n() const { return sites_.cols(); }
  Eigen::Index d() const { return sites_.rows(); }
  const SiteMatrix& sites() const { return sites_; }
  const Eigen::VectorXd& values() const { return values_; }
  const SiteMatrix& gradients() const { return gradients_; }
  auto site(Eigen::Index i) const { return sites_.col(i); }
  double value(Eigen::Index i) const { return values_[i]; }
  auto gradient(Eigen::Index i) const { return gradients_.col(i); }
  const FunctionClass& function_class() const { return class_; }

  bool certified() const { return certified_; }
  void set_certified(bool certified) { certified_ = certified; }

 private:
  SiteMatrix sites_;
  Eigen::VectorXd values_;
  SiteMatrix gradients_;
  FunctionClass class_;
  bool certified_ = false;
};

/// Triplets in conjugate coordinates:
///   tilde_x = g - mu*x,  tilde_g = x,  tilde_f = x'g - f - (mu/2)|x|^2.
struct ConjugateTriplets {
  SiteMatrix tilde_points;     // d x n
  SiteMatrix tilde_gradients;  // d x n
  Eigen::VectorXd tilde_values;
};

/// Single-triplet transform. The inverse is the same map with the point and
/// gradient roles swapped and mu negated: swap(T_{-mu}(swap(.))) = T_mu^{-1}.
void conjugate_triplet(const Eigen::VectorXd& x, const Eigen::VectorXd& g, double f,
                       double mu, Eigen::VectorXd& tilde_x, Eigen::VectorXd& tilde_g,
                       double& tilde_f);

/// Whole-model transform; throws InfiniteLError when the class has L = inf.
ConjugateTriplets to_conjugate_coordinates(const CertifiedModel& model);

}  // namespace cvxreg
