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

#include "cvxreg/interpolant.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "cvxreg/errors.hpp"

namespace cvxreg {

Interpolant build_interpolant(const CertifiedModel& model) {
  const FunctionClass& cls = model.function_class();
  Interpolant interp;
  interp.mu = cls.mu();

  if (!cls.has_finite_L()) {
    interp.kind = cls.mu() > 0.0 ? InterpolantKind::MaxQuadraticMinorant
                                 : InterpolantKind::MaxAffine;
    interp.sites = model.sites();
    interp.values = model.values();
    interp.gradients = model.gradients();
    return interp;
  }

  interp.kind = InterpolantKind::SmoothHull;
  interp.L = cls.L();
  const double gap = interp.L - interp.mu;

  const ConjugateTriplets ct = to_conjugate_coordinates(model);
  const Eigen::Index n = model.n();
  interp.a.resize(model.d(), n);
  interp.b.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    interp.a.col(i) = ct.tilde_gradients.col(i) - ct.tilde_points.col(i) / gap;
    interp.b[i] = ct.tilde_values[i] -
                  ct.tilde_gradients.col(i).dot(ct.tilde_points.col(i)) +
                  ct.tilde_points.col(i).squaredNorm() / (2.0 * gap);
  }
  return interp;
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double running = 0.0;
  double tau = 0.0;
  int support = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    running += sorted[static_cast<std::size_t>(k)];
    const double candidate = (running - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) {
      tau = candidate;
      support = static_cast<int>(k + 1);
    }
  }
  (void)support;
  return (v.array() - tau).max(0.0);
}

namespace {

// Largest eigenvalue of A'A, computed exactly on the d x d dual Gram matrix
// AA' (their nonzero spectra coincide, and d stays tiny).
double gram_spectral_radius(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd outer = a * a.transpose();
  if (outer.rows() == 1) return outer(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(outer,
                                                     Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

double qp_objective(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& x, double scale,
                    const Eigen::VectorXd& lam) {
  return 0.5 * scale * (x - a * lam).squaredNorm() - b.dot(lam);
}

}  // namespace

SimplexQpResult solve_simplex_qp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                 const Eigen::VectorXd& x, double L, double mu,
                                 double tol, int max_iters) {
  if (!(L > mu)) {
    throw InvalidClassError("simplex QP requires finite L > mu");
  }
  const Eigen::Index n = a.cols();
  if (n < 1 || b.size() != n || a.rows() != x.size()) {
    throw DimensionMismatchError("simplex QP: inconsistent shapes");
  }
  const double scale = L - mu;

  SimplexQpResult result;
  if (n == 1) {
    result.lambda = Eigen::VectorXd::Ones(1);
    result.value = 0.5 * scale * (x - a.col(0)).squaredNorm() - b[0];
    result.converged = true;
    return result;
  }

  const double lipschitz = scale * gram_spectral_radius(a);
  if (lipschitz <= std::numeric_limits<double>::min()) {
    // Degenerate quadratic (all pieces share one slope): the objective is
    // linear in lambda, minimized at the best vertex; first index on ties.
    Eigen::Index best = 0;
    b.maxCoeff(&best);
    result.lambda = Eigen::VectorXd::Zero(n);
    result.lambda[best] = 1.0;
    result.value = qp_objective(a, b, x, scale, result.lambda);
    result.converged = true;
    return result;
  }

  const double step = 1.0 / lipschitz;
  Eigen::VectorXd lam = Eigen::VectorXd::Constant(n, 1.0 / double(n));
  Eigen::VectorXd lam_prev = lam;
  Eigen::VectorXd y = lam;
  double t = 1.0;

  Eigen::VectorXd best_lam = lam;
  double best_value = qp_objective(a, b, x, scale, lam);
  bool converged = false;
  int iters = 0;

  for (; iters < max_iters; ++iters) {
    // Vertex gap grad'lam - min_k grad_k bounds the suboptimality from above.
    const Eigen::VectorXd grad_lam = scale * (a.transpose() * (a * lam - x)) - b;
    const double gap = grad_lam.dot(lam) - grad_lam.minCoeff();
    if (gap <= tol) {
      converged = true;
      break;
    }

    const Eigen::VectorXd grad_y = scale * (a.transpose() * (a * y - x)) - b;
    lam_prev = lam;
    lam = project_to_simplex(y - step * grad_y);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = lam + ((t - 1.0) / t_next) * (lam - lam_prev);
    t = t_next;

    const double value = qp_objective(a, b, x, scale, lam);
    if (value < best_value) {
      best_value = value;
      best_lam = lam;
    }
  }

  if (converged) {
    const double value = qp_objective(a, b, x, scale, lam);
    if (value < best_value) {
      best_value = value;
      best_lam = lam;
    }
  }
  result.lambda = best_lam;
  result.value = best_value;
  result.converged = converged;
  result.iterations = iters;
  return result;
}

EvalDetail evaluate_detailed(const Interpolant& interp, const Eigen::VectorXd& x) {
  EvalDetail detail;
  if (x.size() != interp.d()) {
    throw DimensionMismatchError("evaluate: point dimension disagrees");
  }
  switch (interp.kind) {
    case InterpolantKind::SmoothHull: {
      const SimplexQpResult qp =
          solve_simplex_qp(interp.a, interp.b, x, interp.L, interp.mu);
      detail.value = 0.5 * interp.mu * x.squaredNorm() + qp.value;
      detail.converged = qp.converged;
      detail.lambda = qp.lambda;
      return detail;
    }
    case InterpolantKind::MaxAffine: {
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < interp.n(); ++i) {
        best = std::max(best, interp.values[i] +
                                  interp.gradients.col(i).dot(x - interp.sites.col(i)));
      }
      detail.value = best;
      return detail;
    }
    case InterpolantKind::MaxQuadraticMinorant: {
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < interp.n(); ++i) {
        const Eigen::VectorXd dx = x - interp.sites.col(i);
        best = std::max(best, interp.values[i] + interp.gradients.col(i).dot(dx) +
                                  0.5 * interp.mu * dx.squaredNorm());
      }
      detail.value = best;
      return detail;
    }
  }
  return detail;
}

double evaluate(const Interpolant& interp, const Eigen::VectorXd& x) {
  return evaluate_detailed(interp, x).value;
}

Eigen::VectorXd gradient(const Interpolant& interp, const Eigen::VectorXd& x) {
  if (interp.kind != InterpolantKind::SmoothHull) {
    throw InvalidClassError("gradient is defined for the smooth hull kind only");
  }
  const EvalDetail detail = evaluate_detailed(interp, x);
  return interp.mu * x +
         (interp.L - interp.mu) * (x - interp.a * detail.lambda);
}

}  // namespace cvxreg
