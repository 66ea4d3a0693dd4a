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

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "cvxreg/types.hpp"

namespace cvxreg {

/// One directed-edge subproblem in standard form
///   minimize   xi' P0 xi + q0' xi + r0
///   subject to xi' P1 xi + q1' xi + r1 <= 0
/// over xi = [f_i, g_i, f_j, g_j] in R^{2(1+d)}.
///
/// P0 is diagonal by construction (1/(2n) + rho/2 on the two value slots,
/// rho/2 on the gradient slots), hence positive-definite for rho > 0, and is
/// stored as its diagonal. P1 is positive-semidefinite and vanishes on the
/// value slots; it may be singular.
struct EdgeProblem {
  int source = 0;
  int sink = 0;
  Eigen::VectorXd p0_diag;
  Eigen::MatrixXd P1;
  Eigen::VectorXd q0;
  Eigen::VectorXd q1;
  double r0 = 0.0;
  double r1 = 0.0;

  Eigen::Index dim() const { return p0_diag.size(); }
  Eigen::Index site_dim() const { return dim() / 2 - 1; }
  Eigen::MatrixXd P0() const {
    return Eigen::MatrixXd(p0_diag.asDiagonal());
  }
  /// Objective xi' P0 xi + q0' xi + r0.
  double objective(const Eigen::VectorXd& xi) const {
    return xi.dot(p0_diag.cwiseProduct(xi)) + q0.dot(xi) + r0;
  }
  /// Constraint function xi' P1 xi + q1' xi + r1 (feasible when <= 0).
  double constraint(const Eigen::VectorXd& xi) const {
    return xi.dot(P1 * xi) + q1.dot(xi) + r1;
  }
};

/// Builds the standard-form problem for the directed edge (source -> sink)
/// from the sites, observations, consensus targets z and scaled duals lambda.
/// The quadratic objective equals the per-edge split objective
///   (1/(2n)) sum_k (y_k - f_k)^2 + (rho/2) sum_k |eta_k - z_k + lambda_k|^2
/// term by term, and the constraint is the pair inequality rearranged to
/// <= 0 form. Throws InvalidRhoError for rho <= 0.
EdgeProblem assemble_edge_problem(const Eigen::VectorXd& x_i, const Eigen::VectorXd& x_j,
                                  double y_i, double y_j, const Eigen::VectorXd& z_i,
                                  const Eigen::VectorXd& z_j,
                                  const Eigen::VectorXd& lambda_i,
                                  const Eigen::VectorXd& lambda_j, double rho,
                                  Eigen::Index n, const FunctionClass& function_class,
                                  int source = 0, int sink = 1);

/// Static part of the edge constraint (P1, q1, r1); depends on the sites and
/// class only, so ADMM precomputes it once per edge.
void assemble_edge_constraint(const Eigen::VectorXd& x_i, const Eigen::VectorXd& x_j,
                              const FunctionClass& function_class, Eigen::MatrixXd& P1,
                              Eigen::VectorXd& q1, double& r1);

/// Reusable factorization/workspace for the dual solves; one per worker.
struct EdgeScratch {
  Eigen::MatrixXd Pnu;
  Eigen::LDLT<Eigen::MatrixXd> ldlt;
  Eigen::VectorXd qnu, u, v, w, t;

  void resize(Eigen::Index dim);
};

/// Dual function phi(nu) = -(1/4) q_nu' P_nu^{-1} q_nu + nu r1 + r0, nu >= 0.
/// Throws SingularSystemError if P_nu fails to factor as positive-definite.
double dual_value(double nu, const EdgeProblem& prob);
double dual_value(double nu, const EdgeProblem& prob, EdgeScratch& scratch);

struct DualDerivatives {
  double grad = 0.0;
  double hess = 0.0;
};

/// First and second derivatives of the dual function at nu.
DualDerivatives dual_derivatives(double nu, const EdgeProblem& prob);
DualDerivatives dual_derivatives(double nu, const EdgeProblem& prob,
                                 EdgeScratch& scratch);

struct NewtonOptions {
  double tol = 1e-9;
  int max_iters = 50;
  double nu0 = 0.0;
};

struct EdgeSolution {
  Eigen::VectorXd xi;
  double nu = 0.0;
  bool converged = false;
  int iterations = 0;
  /// |projected dual gradient| at exit: max(grad, 0) at nu = 0, |grad| else.
  double projected_grad = 0.0;
};

/// Maximizes the concave dual by projected Newton with backtracking, then
/// recovers the primal xi* = -(1/2) P_{nu*}^{-1} q_{nu*}.
///
/// Fast path: if the unconstrained minimizer already satisfies the constraint
/// (dual gradient at 0 is <= tol), returns nu* = 0 immediately. On iteration
/// exhaustion the best dual iterate seen is returned with converged = false.
EdgeSolution solve_edge(const EdgeProblem& prob, const NewtonOptions& opts = {});

/// Allocation-free variant for the ADMM sweep; `out` must have size dim().
void solve_edge_into(const EdgeProblem& prob, const NewtonOptions& opts,
                     EdgeScratch& scratch, Eigen::Ref<Eigen::VectorXd> out,
                     EdgeSolution* diag = nullptr);

}  // namespace cvxreg
