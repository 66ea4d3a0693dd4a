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

#include "cvxreg/edge_qcqp.hpp"

#include <cmath>
#include <string>

#include "cvxreg/errors.hpp"

namespace cvxreg {

void EdgeScratch::resize(Eigen::Index dim) {
  Pnu.resize(dim, dim);
  qnu.resize(dim);
  u.resize(dim);
  v.resize(dim);
  w.resize(dim);
  t.resize(dim);
}

void assemble_edge_constraint(const Eigen::VectorXd& x_i, const Eigen::VectorXd& x_j,
                              const FunctionClass& function_class, Eigen::MatrixXd& P1,
                              Eigen::VectorXd& q1, double& r1) {
  const Eigen::Index d = x_i.size();
  if (x_j.size() != d) {
    throw DimensionMismatchError("edge constraint: site dimensions disagree");
  }
  const Eigen::Index dim = 2 * (1 + d);
  const auto c = function_class.pair_coefficients();
  const Eigen::VectorXd dx = x_i - x_j;

  // Constraint in <= 0 form is the negated pair residual:
  //   -(f_i - f_j) + g_j'dx + grad_sq|g_i - g_j|^2 + site_sq|dx|^2
  //   + cross (g_i - g_j)'dx  <= 0.
  P1.setZero(dim, dim);
  for (Eigen::Index k = 0; k < d; ++k) {
    P1(1 + k, 1 + k) = c.grad_sq;
    P1(2 + d + k, 2 + d + k) = c.grad_sq;
    P1(1 + k, 2 + d + k) = -c.grad_sq;
    P1(2 + d + k, 1 + k) = -c.grad_sq;
  }
  q1.setZero(dim);
  q1[0] = -1.0;
  q1[1 + d] = 1.0;
  q1.segment(1, d) = c.cross * dx;
  q1.segment(2 + d, d) = (1.0 - c.cross) * dx;
  r1 = c.site_sq * dx.squaredNorm();
}

EdgeProblem assemble_edge_problem(const Eigen::VectorXd& x_i, const Eigen::VectorXd& x_j,
                                  double y_i, double y_j, const Eigen::VectorXd& z_i,
                                  const Eigen::VectorXd& z_j,
                                  const Eigen::VectorXd& lambda_i,
                                  const Eigen::VectorXd& lambda_j, double rho,
                                  Eigen::Index n, const FunctionClass& function_class,
                                  int source, int sink) {
  if (!(rho > 0.0)) {
    throw InvalidRhoError("rho must be positive, got " + std::to_string(rho));
  }
  const Eigen::Index d = x_i.size();
  if (z_i.size() != 1 + d || z_j.size() != 1 + d || lambda_i.size() != 1 + d ||
      lambda_j.size() != 1 + d) {
    throw DimensionMismatchError("edge objective: z/lambda must have size 1 + d");
  }
  const Eigen::Index dim = 2 * (1 + d);

  EdgeProblem prob;
  prob.source = source;
  prob.sink = sink;
  assemble_edge_constraint(x_i, x_j, function_class, prob.P1, prob.q1, prob.r1);

  prob.p0_diag.setConstant(dim, rho / 2.0);
  prob.p0_diag[0] += 1.0 / (2.0 * static_cast<double>(n));
  prob.p0_diag[1 + d] += 1.0 / (2.0 * static_cast<double>(n));

  // w_k = z_k - lambda_k is the prox target of eta_k.
  const Eigen::VectorXd w_i = z_i - lambda_i;
  const Eigen::VectorXd w_j = z_j - lambda_j;
  prob.q0.setZero(dim);
  prob.q0[0] = -y_i / static_cast<double>(n) - rho * w_i[0];
  prob.q0[1 + d] = -y_j / static_cast<double>(n) - rho * w_j[0];
  prob.q0.segment(1, d) = -rho * w_i.tail(d);
  prob.q0.segment(2 + d, d) = -rho * w_j.tail(d);
  prob.r0 = (y_i * y_i + y_j * y_j) / (2.0 * static_cast<double>(n)) +
            rho / 2.0 * (w_i.squaredNorm() + w_j.squaredNorm());
  return prob;
}

namespace {

// Direct symmetric factorization of P_nu = P0 + nu*P1, recomputed per nu.
// nu = 0 keeps the diagonal structure of P0, so the solve is elementwise.
class PnuFactor {
 public:
  PnuFactor(double nu, const EdgeProblem& prob, EdgeScratch& s)
      : prob_(prob), scratch_(s), diagonal_(nu == 0.0) {
    if (diagonal_) {
      if (!(prob.p0_diag.minCoeff() > 0.0)) {
        throw SingularSystemError("P0 is not positive-definite");
      }
      return;
    }
    s.Pnu.noalias() = nu * prob.P1;
    s.Pnu.diagonal() += prob.p0_diag;
    s.ldlt.compute(s.Pnu);
    if (s.ldlt.info() != Eigen::Success || !s.ldlt.vectorD().allFinite() ||
        !(s.ldlt.vectorD().minCoeff() > 0.0)) {
      throw SingularSystemError("P_nu factorization failed at nu = " +
                                std::to_string(nu));
    }
  }

  void solve(const Eigen::VectorXd& b, Eigen::VectorXd& out) const {
    if (diagonal_) {
      out = b.cwiseQuotient(prob_.p0_diag);
    } else {
      out = scratch_.ldlt.solve(b);
    }
  }

 private:
  const EdgeProblem& prob_;
  EdgeScratch& scratch_;
  bool diagonal_;
};

struct DualPoint {
  double phi = 0.0;
  double grad = 0.0;
  double hess = 0.0;
};

double eval_phi(double nu, const EdgeProblem& prob, EdgeScratch& s) {
  const PnuFactor factor(nu, prob, s);
  s.qnu = prob.q0 + nu * prob.q1;
  factor.solve(s.qnu, s.u);
  return -0.25 * s.qnu.dot(s.u) + nu * prob.r1 + prob.r0;
}

DualPoint eval_dual(double nu, const EdgeProblem& prob, EdgeScratch& s) {
  const PnuFactor factor(nu, prob, s);
  s.qnu = prob.q0 + nu * prob.q1;
  factor.solve(s.qnu, s.u);
  s.w.noalias() = prob.P1 * s.u;
  DualPoint p;
  p.phi = -0.25 * s.qnu.dot(s.u) + nu * prob.r1 + prob.r0;
  p.grad = -0.5 * prob.q1.dot(s.u) + 0.25 * s.u.dot(s.w) + prob.r1;
  factor.solve(prob.q1, s.v);
  factor.solve(s.w, s.t);
  p.hess = -0.5 * prob.q1.dot(s.v) + s.v.dot(s.w) - 0.5 * s.w.dot(s.t);
  return p;
}

double projected_gradient(double nu, double grad) {
  return nu > 0.0 ? std::abs(grad) : std::max(grad, 0.0);
}

}  // namespace

double dual_value(double nu, const EdgeProblem& prob, EdgeScratch& scratch) {
  return eval_phi(nu, prob, scratch);
}

double dual_value(double nu, const EdgeProblem& prob) {
  EdgeScratch scratch;
  scratch.resize(prob.dim());
  return eval_phi(nu, prob, scratch);
}

DualDerivatives dual_derivatives(double nu, const EdgeProblem& prob,
                                 EdgeScratch& scratch) {
  const DualPoint p = eval_dual(nu, prob, scratch);
  return {p.grad, p.hess};
}

DualDerivatives dual_derivatives(double nu, const EdgeProblem& prob) {
  EdgeScratch scratch;
  scratch.resize(prob.dim());
  return dual_derivatives(nu, prob, scratch);
}

void solve_edge_into(const EdgeProblem& prob, const NewtonOptions& opts,
                     EdgeScratch& scratch, Eigen::Ref<Eigen::VectorXd> out,
                     EdgeSolution* diag) {
  constexpr double kArmijo = 1e-4;
  constexpr double kBacktrack = 0.5;
  constexpr double kMinAlpha = 1e-16;
  constexpr double kCurvatureFloor = -1e-14;

  double nu = std::max(0.0, opts.nu0);
  DualPoint p = eval_dual(nu, prob, scratch);
  double best_phi = p.phi;
  double best_nu = nu;
  int iters = 0;
  bool converged = false;

  while (true) {
    const double pg = projected_gradient(nu, p.grad);
    if (pg <= opts.tol && nu * std::abs(p.grad) <= 10.0 * opts.tol) {
      converged = true;
      break;
    }
    if (iters >= opts.max_iters) break;
    ++iters;

    // Newton step on the concave dual; gradient ascent when curvature is
    // numerically flat (near-affine dual).
    const double dir = p.hess < kCurvatureFloor ? -p.grad / p.hess : p.grad;
    double alpha = 1.0;
    bool accepted = false;
    double nu_next = nu;
    if (p.grad * dir <= 1e-15 * (1.0 + std::abs(p.phi))) {
      // The predicted increase is below the resolution of phi itself, so the
      // sufficient-increase test cannot be evaluated; take the raw step.
      nu_next = std::max(0.0, nu + dir);
      accepted = nu_next != nu;
    } else {
      while (alpha >= kMinAlpha) {
        nu_next = std::max(0.0, nu + alpha * dir);
        if (nu_next != nu) {
          const double phi_next = eval_phi(nu_next, prob, scratch);
          if (phi_next >= p.phi + kArmijo * p.grad * (nu_next - nu)) {
            accepted = true;
            break;
          }
        }
        alpha *= kBacktrack;
      }
    }
    if (!accepted) break;  // stagnated; report the projected gradient as is

    nu = nu_next;
    p = eval_dual(nu, prob, scratch);
    if (p.phi > best_phi) {
      best_phi = p.phi;
      best_nu = nu;
    }
  }

  if (!converged && nu != best_nu) {
    nu = best_nu;
    p = eval_dual(nu, prob, scratch);
  }

  // Primal recovery xi* = -(1/2) P_nu^{-1} q_nu; eval_dual left u = P^{-1}q.
  out = -0.5 * scratch.u;

  if (diag != nullptr) {
    diag->nu = nu;
    diag->converged = converged;
    diag->iterations = iters;
    diag->projected_grad = projected_gradient(nu, p.grad);
  }
}

EdgeSolution solve_edge(const EdgeProblem& prob, const NewtonOptions& opts) {
  EdgeScratch scratch;
  scratch.resize(prob.dim());
  EdgeSolution sol;
  sol.xi.resize(prob.dim());
  solve_edge_into(prob, opts, scratch, sol.xi, &sol);
  return sol;
}

}  // namespace cvxreg
