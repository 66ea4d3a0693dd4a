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

enum class InterpolantKind {
  /// Finite L: convex hull of per-site quadratic pieces plus (mu/2)|x|^2,
  /// evaluated through a simplex-constrained QP in conjugate coordinates.
  SmoothHull,
  /// mu = 0, L = inf: max of supporting affine pieces.
  MaxAffine,
  /// mu > 0, L = inf: max of per-site mu-quadratic minorants.
  MaxQuadraticMinorant,
};

/// Everywhere-evaluable member of the class fitted to per-site triplets.
///
/// For SmoothHull the pieces are stored through their conjugate-coordinate
/// affine data (a_i, b_i): every transformed piece shares the quadratic term
/// |x|^2/(2(L-mu)), so h_i(x) = |x|^2/(2(L-mu)) + a_i'x + b_i and evaluation
/// reduces to minimizing ((L-mu)/2)|x - A lam|^2 - b'lam over the simplex.
/// For the L = inf kinds the raw triplets are kept.
struct Interpolant {
  InterpolantKind kind = InterpolantKind::MaxAffine;
  double mu = 0.0;
  double L = 0.0;  // meaningful for SmoothHull only

  // SmoothHull data: one column of `a` and entry of `b` per site.
  Eigen::MatrixXd a;  // d x n
  Eigen::VectorXd b;

  // MaxAffine / MaxQuadraticMinorant data.
  SiteMatrix sites;       // d x n
  Eigen::VectorXd values;
  SiteMatrix gradients;   // d x n

  Eigen::Index n() const {
    return kind == InterpolantKind::SmoothHull ? b.size() : values.size();
  }
  Eigen::Index d() const {
    return kind == InterpolantKind::SmoothHull ? a.rows() : sites.rows();
  }
};

/// Builds the interpolant for the model's class; dispatches on (mu, L).
/// The triplets may be certified or ADMM-approximate.
Interpolant build_interpolant(const CertifiedModel& model);

struct SimplexQpResult {
  Eigen::VectorXd lambda;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Minimizes ((L-mu)/2)|x - A lam|^2 - b'lam over the probability simplex by
/// accelerated projected gradient with exact sort-based simplex projection.
/// Convergence is declared when the linear-minimization (vertex) gap, an
/// upper bound on the objective suboptimality, drops to tol.
SimplexQpResult solve_simplex_qp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                 const Eigen::VectorXd& x, double L, double mu,
                                 double tol = 1e-9, int max_iters = 10000);

/// Euclidean projection onto {lam >= 0, sum lam = 1}.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

struct EvalDetail {
  double value = 0.0;
  bool converged = true;
  Eigen::VectorXd lambda;  // simplex weights (SmoothHull only)
};

/// Value at x; for SmoothHull a non-converged inner QP is reported through
/// the detail flag and the best value found is returned.
double evaluate(const Interpolant& interp, const Eigen::VectorXd& x);
EvalDetail evaluate_detailed(const Interpolant& interp, const Eigen::VectorXd& x);

/// Gradient mu*x + (L-mu)(x - A lam*) of the SmoothHull interpolant; throws
/// InvalidClassError for the nonsmooth kinds, which have no gradient map.
Eigen::VectorXd gradient(const Interpolant& interp, const Eigen::VectorXd& x);

}  // namespace cvxreg
