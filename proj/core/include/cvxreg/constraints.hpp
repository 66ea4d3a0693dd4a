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

#include "cvxreg/types.hpp"

namespace cvxreg {

/// Residual of the ordered-pair interpolability inequality for (i, j).
/// Sign convention: residual = LHS - RHS, so nonnegative means satisfied.
struct PairResidual {
  int i = 0;
  int j = 0;
  double residual = 0.0;
};

/// Ordered-pair residual
///   f_i - f_j - g_j'(x_i - x_j)
///     - grad_sq*|g_i - g_j|^2 - site_sq*|x_i - x_j|^2
///     - cross*(g_i - g_j)'(x_i - x_j)
/// with the class coefficients of FunctionClass::pair_coefficients(), which
/// specialize the nonsmooth (L = inf) and convex-only (mu = 0) limits exactly.
/// Throws DimensionMismatchError on inconsistent vector sizes.
double constraint_residual(const Eigen::VectorXd& x_i, double f_i,
                           const Eigen::VectorXd& g_i, const Eigen::VectorXd& x_j,
                           double f_j, const Eigen::VectorXd& g_j,
                           const FunctionClass& function_class);

struct CertifyResult {
  bool feasible = false;
  PairResidual worst;  // minimizing ordered pair, first on ties
};

/// Scans all n(n-1) ordered pairs in row-major order and reports whether the
/// minimum residual is >= -tol. Sets model.certified accordingly.
CertifyResult certify(CertifiedModel& model, double tol = kDefaultFeasibilityTol);

/// Scan without mutating the model (for diagnostics on const data).
CertifyResult check_feasibility(const CertifiedModel& model,
                                double tol = kDefaultFeasibilityTol);

}  // namespace cvxreg
