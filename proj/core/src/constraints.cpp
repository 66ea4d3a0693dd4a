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

#include "cvxreg/constraints.hpp"

#include <string>

namespace cvxreg {

double constraint_residual(const Eigen::VectorXd& x_i, double f_i,
                           const Eigen::VectorXd& g_i, const Eigen::VectorXd& x_j,
                           double f_j, const Eigen::VectorXd& g_j,
                           const FunctionClass& function_class) {
  const Eigen::Index d = x_i.size();
  if (g_i.size() != d || x_j.size() != d || g_j.size() != d) {
    throw DimensionMismatchError("pair residual: vector dimensions disagree");
  }
  const auto c = function_class.pair_coefficients();
  const Eigen::VectorXd dx = x_i - x_j;
  const Eigen::VectorXd dg = g_i - g_j;
  return f_i - f_j - g_j.dot(dx) - c.grad_sq * dg.squaredNorm() -
         c.site_sq * dx.squaredNorm() - c.cross * dg.dot(dx);
}

CertifyResult check_feasibility(const CertifiedModel& model, double tol) {
  const Eigen::Index n = model.n();
  CertifyResult result;
  bool first = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r = constraint_residual(
          model.site(i), model.value(i), model.gradient(i), model.site(j),
          model.value(j), model.gradient(j), model.function_class());
      if (first || r < result.worst.residual) {
        result.worst = {static_cast<int>(i), static_cast<int>(j), r};
        first = false;
      }
    }
  }
  result.feasible = !first && result.worst.residual >= -tol;
  if (n == 1) {
    // A single triplet is vacuously interpolable.
    result.feasible = true;
    result.worst = {0, 0, 0.0};
  }
  return result;
}

CertifyResult certify(CertifiedModel& model, double tol) {
  const CertifyResult result = check_feasibility(model, tol);
  model.set_certified(result.feasible);
  return result;
}

}  // namespace cvxreg
