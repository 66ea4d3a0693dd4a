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

#include "cvxreg/harness.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "cvxreg/errors.hpp"
#include "cvxreg/gp_warmstart.hpp"

namespace cvxreg {

double NormalSampler::normal() {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

ObservationSet synth_quadratic(Eigen::Index n, double sigma, std::uint64_t seed) {
  if (n < 2) {
    throw TooFewPointsError("synthetic set needs n >= 2");
  }
  NormalSampler sampler(seed);
  SiteMatrix points(1, n);
  Eigen::VectorXd values(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    points(0, i) = x;
    values[i] = x * x + sigma * sampler.normal();
  }
  return ObservationSet(std::move(points), std::move(values));
}

namespace {

// Self-contained penalized objective for the oracle. Variable layout:
// v = [f_0..f_{n-1}, g_0, ..., g_{n-1}] with each g_i a d-block.
struct PenaltyEval {
  double penalized = 0.0;
  double objective = 0.0;
  double max_violation = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

struct OracleCoeffs {
  double grad_sq = 0.0;
  double site_sq = 0.0;
  double cross = 0.0;
};

OracleCoeffs oracle_coeffs(const FunctionClass& cls) {
  // Written out independently of the constraints module.
  if (!cls.has_finite_L()) {
    return {0.0, cls.mu() / 2.0, 0.0};
  }
  const double gap = cls.L() - cls.mu();
  return {1.0 / (2.0 * gap), cls.mu() * cls.L() / (2.0 * gap), -cls.mu() / gap};
}

PenaltyEval eval_penalized(const ObservationSet& obs, const OracleCoeffs& c,
                           double pen, const Eigen::VectorXd& v, bool with_hess) {
  const Eigen::Index n = obs.n();
  const Eigen::Index d = obs.d();
  const Eigen::Index dim = n * (1 + d);

  PenaltyEval out;
  out.grad.setZero(dim);
  if (with_hess) out.hess.setZero(dim, dim);

  for (Eigen::Index i = 0; i < n; ++i) {
    const double resid = obs.value(i) - v[i];
    out.objective += resid * resid;
    out.grad[i] += -2.0 * resid;
    if (with_hess) out.hess(i, i) += 2.0;
  }
  out.penalized = out.objective;

  const auto gslot = [&](Eigen::Index i) { return n + i * d; };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const Eigen::VectorXd dx = obs.site(i) - obs.site(j);
      const Eigen::VectorXd dg =
          v.segment(gslot(i), d) - v.segment(gslot(j), d);
      const double r = v[i] - v[j] - v.segment(gslot(j), d).dot(dx) -
                       c.grad_sq * dg.squaredNorm() - c.site_sq * dx.squaredNorm() -
                       c.cross * dg.dot(dx);
      const double viol = std::max(0.0, -r);
      out.max_violation = std::max(out.max_violation, viol);
      if (viol <= 0.0) continue;

      out.penalized += pen * viol * viol;

      // grad r in the (f_i, f_j, g_i, g_j) slots.
      Eigen::VectorXd dgi = -2.0 * c.grad_sq * dg - c.cross * dx;
      Eigen::VectorXd dgj = -dx + 2.0 * c.grad_sq * dg + c.cross * dx;
      const double w = -2.0 * pen * viol;  // d(pen*viol^2)/dr
      out.grad[i] += w;
      out.grad[j] -= w;
      out.grad.segment(gslot(i), d) += w * dgi;
      out.grad.segment(gslot(j), d) += w * dgj;

      if (with_hess) {
        // 2*pen*(grad r)(grad r)' - 2*pen*viol * hess r on the active set.
        Eigen::VectorXd gr = Eigen::VectorXd::Zero(dim);
        gr[i] = 1.0;
        gr[j] = -1.0;
        gr.segment(gslot(i), d) = dgi;
        gr.segment(gslot(j), d) = dgj;
        out.hess.noalias() += 2.0 * pen * gr * gr.transpose();
        const double hr = 2.0 * pen * viol * 2.0 * c.grad_sq;
        for (Eigen::Index k = 0; k < d; ++k) {
          out.hess(gslot(i) + k, gslot(i) + k) -= hr;
          out.hess(gslot(j) + k, gslot(j) + k) -= hr;
          out.hess(gslot(i) + k, gslot(j) + k) += hr;
          out.hess(gslot(j) + k, gslot(i) + k) += hr;
        }
      }
    }
  }
  return out;
}

}  // namespace

OracleResult reference_fit_small(const ObservationSet& observations,
                                 const FunctionClass& function_class, double tol) {
  const Eigen::Index n = observations.n();
  const Eigen::Index d = observations.d();
  if (n > 8) {
    throw Error("reference_fit_small is restricted to n <= 8");
  }
  const OracleCoeffs coeffs = oracle_coeffs(function_class);
  const Eigen::Index dim = n * (1 + d);

  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  v.head(n) = observations.values();

  OracleResult result;
  double pen = 1.0;
  constexpr double kMaxPen = 1e12;
  constexpr int kMaxInner = 200;

  while (true) {
    ++result.outer_rounds;
    PenaltyEval eval = eval_penalized(observations, coeffs, pen, v, true);
    double damping = 1e-8;
    for (int it = 0; it < kMaxInner; ++it) {
      if (eval.grad.lpNorm<Eigen::Infinity>() <= 0.1 * tol) break;
      ++result.newton_iterations;

      Eigen::VectorXd step;
      while (true) {
        Eigen::MatrixXd damped = eval.hess;
        damped.diagonal().array() += damping;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
        if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0) {
          step = ldlt.solve(-eval.grad);
          break;
        }
        damping *= 10.0;
        if (damping > 1e16) {
          throw OracleNotConvergedError("oracle Hessian damping exhausted");
        }
      }

      double t = 1.0;
      const double slope = eval.grad.dot(step);
      bool moved = false;
      while (t >= 1e-14) {
        const PenaltyEval trial =
            eval_penalized(observations, coeffs, pen, v + t * step, false);
        if (trial.penalized <= eval.penalized + 1e-4 * t * slope) {
          v += t * step;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) break;
      eval = eval_penalized(observations, coeffs, pen, v, true);
      damping = std::max(damping / 3.0, 1e-12);
    }

    eval = eval_penalized(observations, coeffs, pen, v, false);
    if (eval.max_violation <= tol &&
        eval.grad.lpNorm<Eigen::Infinity>() <= tol) {
      result.values = v.head(n);
      result.gradients.resize(d, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        result.gradients.col(i) = v.segment(n + i * d, d);
      }
      result.objective = eval.objective;
      result.kkt_residual = eval.grad.lpNorm<Eigen::Infinity>();
      result.max_violation = eval.max_violation;
      return result;
    }
    if (pen >= kMaxPen) {
      throw OracleNotConvergedError(
          "penalty schedule exhausted; violation = " +
          std::to_string(eval.max_violation));
    }
    pen *= 2.0;
  }
}

double error_metric(const Interpolant& interp,
                    const std::function<double(double)>& true_fn, double lo,
                    double hi, int n_s) {
  if (n_s < 2) {
    throw Error("error metric needs n_s >= 2");
  }
  if (interp.d() != 1) {
    throw DimensionMismatchError("error metric is defined on 1-D interpolants");
  }
  double total = 0.0;
  Eigen::VectorXd x(1);
  for (int s = 0; s < n_s; ++s) {
    x[0] = lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(n_s - 1);
    const double diff = evaluate(interp, x) - true_fn(x[0]);
    total += diff * diff;
  }
  return total / static_cast<double>(n_s);
}

std::vector<BenchRecord> bench_scaling(const std::vector<ExperimentConfig>& configs) {
  std::vector<BenchRecord> records;
  records.reserve(configs.size());
  using clock = std::chrono::steady_clock;

  for (const ExperimentConfig& cfg : configs) {
    const ObservationSet obs = synth_quadratic(cfg.n, cfg.noise_sigma, cfg.seed);
    std::optional<Eigen::MatrixXd> warm;
    if (cfg.gp_warm_start) warm = initial_consensus(obs);

    const auto tic = clock::now();
    const FitResult fit_result = fit(obs, cfg.function_class, cfg.admm, warm);
    const double total = std::chrono::duration<double>(clock::now() - tic).count();

    // Median per-iteration time over post-warm-up iterations.
    std::vector<double> times;
    const std::size_t warmup =
        fit_result.trace.size() > 6 ? std::min<std::size_t>(3, fit_result.trace.size() - 5)
                                    : 0;
    for (std::size_t k = warmup; k < fit_result.trace.size(); ++k) {
      times.push_back(fit_result.trace[k].seconds);
    }
    double per_iter = 0.0;
    if (!times.empty()) {
      std::sort(times.begin(), times.end());
      per_iter = times[times.size() / 2];
    }

    const Interpolant interp = build_interpolant(fit_result.model);
    const double e = error_metric(interp, quadratic_truth, cfg.grid_lo, cfg.grid_hi,
                                  cfg.grid_points);

    BenchRecord rec;
    rec.n = static_cast<int>(cfg.n);
    rec.method = cfg.method_tag;
    rec.iters = fit_result.iterations;
    rec.residual = fit_result.final_residual;
    rec.time_total_s = total;
    rec.time_per_iter_s = per_iter;
    rec.e_metric = e;
    rec.edge_count = static_cast<long>(cfg.n) * (static_cast<long>(cfg.n) - 1);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace cvxreg
