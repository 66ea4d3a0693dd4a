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

#include "cvxreg/admm.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "cvxreg/errors.hpp"

namespace cvxreg {

EdgeSet build_edge_set(Eigen::Index n) {
  if (n < 2) {
    throw TooFewPointsError("edge set needs n >= 2, got " + std::to_string(n));
  }
  EdgeSet set;
  set.n = static_cast<int>(n);
  set.edges.reserve(static_cast<std::size_t>(n * (n - 1)));
  for (int i = 0; i < set.n; ++i) {
    for (int j = 0; j < set.n; ++j) {
      if (i != j) set.edges.emplace_back(i, j);
    }
  }
  return set;
}

AdmmProblem::AdmmProblem(const ObservationSet& observations,
                         const FunctionClass& function_class, double rho)
    : observations_(observations),
      class_(function_class),
      edges_(build_edge_set(observations.n())),
      rho_(rho) {
  if (!(rho_ > 0.0)) {
    throw InvalidRhoError("rho must be positive, got " + std::to_string(rho_));
  }
  const Eigen::Index d = observations_.d();
  const Eigen::Index dim = 2 * (1 + d);
  const Eigen::Index m = edges_.count();

  p0_diag_.setConstant(dim, rho_ / 2.0);
  p0_diag_[0] += 1.0 / (2.0 * static_cast<double>(observations_.n()));
  p0_diag_[1 + d] += 1.0 / (2.0 * static_cast<double>(observations_.n()));

  // P1 depends on the class only; q1, r1 depend additionally on the two
  // sites, so they are tabulated per edge.
  q1_.resize(dim, m);
  r1_.resize(m);
  Eigen::VectorXd q1_e;
  double r1_e = 0.0;
  for (Eigen::Index e = 0; e < m; ++e) {
    const auto [i, j] = edges_.edges[static_cast<std::size_t>(e)];
    assemble_edge_constraint(observations_.site(i), observations_.site(j), class_,
                             P1_, q1_e, r1_e);
    q1_.col(e) = q1_e;
    r1_[e] = r1_e;
  }
}

AdmmState AdmmProblem::initial_state(
    const std::optional<Eigen::MatrixXd>& warm_start) const {
  const Eigen::Index d = observations_.d();
  const Eigen::Index n = observations_.n();
  const Eigen::Index m = edges_.count();

  AdmmState state;
  state.rho = rho_;
  if (warm_start.has_value()) {
    if (warm_start->rows() != 1 + d || warm_start->cols() != n) {
      throw DimensionMismatchError("warm start must be (1+d) x n");
    }
    state.z = *warm_start;
  } else {
    state.z.setZero(1 + d, n);
    state.z.row(0) = observations_.values().transpose();
  }
  state.lambda.setZero(1 + d, 2 * m);
  state.xi.setZero(2 * (1 + d), m);
  for (Eigen::Index e = 0; e < m; ++e) {
    const auto [i, j] = edges_.edges[static_cast<std::size_t>(e)];
    state.xi.col(e).head(1 + d) = state.z.col(i);
    state.xi.col(e).tail(1 + d) = state.z.col(j);
  }
  return state;
}

namespace {

// Fills the iteration-dependent part (q0, r0) of a reused EdgeProblem.
void fill_edge_objective(const AdmmProblem& problem, const AdmmState& state,
                         Eigen::Index e, EdgeProblem& prob) {
  const ObservationSet& obs = problem.observations();
  const Eigen::Index d = obs.d();
  const double n = static_cast<double>(obs.n());
  const double rho = problem.rho();
  const auto [i, j] = problem.edge_set().edges[static_cast<std::size_t>(e)];

  prob.source = i;
  prob.sink = j;
  prob.q1 = problem.q1().col(e);
  prob.r1 = problem.r1()[e];

  const double y_i = obs.value(i);
  const double y_j = obs.value(j);
  double w_sq = 0.0;
  {
    const double w0 = state.z(0, i) - state.lambda(0, 2 * e);
    prob.q0[0] = -y_i / n - rho * w0;
    w_sq += w0 * w0;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double wk = state.z(1 + k, i) - state.lambda(1 + k, 2 * e);
      prob.q0[1 + k] = -rho * wk;
      w_sq += wk * wk;
    }
  }
  {
    const double w0 = state.z(0, j) - state.lambda(0, 2 * e + 1);
    prob.q0[1 + d] = -y_j / n - rho * w0;
    w_sq += w0 * w0;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double wk = state.z(1 + k, j) - state.lambda(1 + k, 2 * e + 1);
      prob.q0[2 + d + k] = -rho * wk;
      w_sq += wk * wk;
    }
  }
  prob.r0 = (y_i * y_i + y_j * y_j) / (2.0 * n) + 0.5 * rho * w_sq;
}

struct SweepStats {
  long failures = 0;
  std::pair<int, int> last_failure{-1, -1};
};

void sweep_range(const AdmmProblem& problem, const AdmmState& state,
                 const NewtonOptions& opts, Eigen::Index begin, Eigen::Index end,
                 Eigen::MatrixXd& xi_out, SweepStats& stats) {
  EdgeProblem prob;
  prob.p0_diag = problem.p0_diag();
  prob.P1 = problem.P1();
  prob.q0.resize(problem.dim());
  prob.q1.resize(problem.dim());
  EdgeScratch scratch;
  scratch.resize(problem.dim());
  EdgeSolution diag;
  for (Eigen::Index e = begin; e < end; ++e) {
    fill_edge_objective(problem, state, e, prob);
    solve_edge_into(prob, opts, scratch, xi_out.col(e), &diag);
    if (!diag.converged) {
      ++stats.failures;
      stats.last_failure = {prob.source, prob.sink};
    }
  }
}

}  // namespace

EdgeProblem AdmmProblem::edge_problem(Eigen::Index e, const AdmmState& state) const {
  EdgeProblem prob;
  prob.p0_diag = p0_diag_;
  prob.P1 = P1_;
  prob.q0.resize(dim());
  prob.q1.resize(dim());
  fill_edge_objective(*this, state, e, prob);
  return prob;
}

double stopping_residual(const EdgeSet& edges, const Eigen::MatrixXd& xi,
                         const Eigen::MatrixXd& z_plus, const Eigen::MatrixXd& z_prev) {
  const Eigen::Index slot = z_plus.rows();
  double eps = (z_plus - z_prev).lpNorm<Eigen::Infinity>();
  for (Eigen::Index e = 0; e < edges.count(); ++e) {
    const auto [i, j] = edges.edges[static_cast<std::size_t>(e)];
    eps = std::max(eps, (xi.col(e).head(slot) - z_plus.col(i)).lpNorm<Eigen::Infinity>());
    eps = std::max(eps, (xi.col(e).tail(slot) - z_plus.col(j)).lpNorm<Eigen::Infinity>());
  }
  return eps;
}

double admm_step(AdmmState& state, const AdmmProblem& problem, const AdmmConfig& config,
                 StepDiagnostics* diag) {
  const EdgeSet& edges = problem.edge_set();
  const Eigen::Index m = edges.count();
  const Eigen::Index slot = state.z.rows();
  const Eigen::Index n = state.z.cols();

  NewtonOptions newton;
  newton.tol = config.newton_tol;
  newton.max_iters = config.max_newton_iters;

  // Step 1: per-edge prox solves. Workers write disjoint columns of xi; the
  // result is independent of the partition, so any worker count reproduces
  // the single-threaded state bit for bit.
  const int workers = std::max(1, config.workers);
  SweepStats stats;
  if (workers == 1 || m < 2 * workers) {
    sweep_range(problem, state, newton, 0, m, state.xi, stats);
  } else {
    std::vector<std::thread> pool;
    std::vector<SweepStats> worker_stats(static_cast<std::size_t>(workers));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    const Eigen::Index chunk = (m + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const Eigen::Index begin = std::min<Eigen::Index>(m, w * chunk);
      const Eigen::Index end = std::min<Eigen::Index>(m, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          sweep_range(problem, state, newton, begin, end, state.xi,
                      worker_stats[static_cast<std::size_t>(w)]);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
    for (const auto& ws : worker_stats) {
      stats.failures += ws.failures;
      if (ws.last_failure.first >= 0) stats.last_failure = ws.last_failure;
    }
  }

  // Step 2: consensus update, reduced in fixed lexicographic edge order.
  Eigen::MatrixXd z_next = Eigen::MatrixXd::Zero(slot, n);
  for (Eigen::Index e = 0; e < m; ++e) {
    const auto [i, j] = edges.edges[static_cast<std::size_t>(e)];
    z_next.col(i) += state.xi.col(e).head(slot);
    z_next.col(j) += state.xi.col(e).tail(slot);
  }
  const double denom = config.z_update_mode == ZUpdateMode::ExactAverage
                           ? 2.0 * static_cast<double>(n - 1)
                           : 2.0 * static_cast<double>(n);
  z_next /= denom;

  // Step 3: scaled dual update per edge slot.
  for (Eigen::Index e = 0; e < m; ++e) {
    const auto [i, j] = edges.edges[static_cast<std::size_t>(e)];
    state.lambda.col(2 * e) += state.xi.col(e).head(slot) - z_next.col(i);
    state.lambda.col(2 * e + 1) += state.xi.col(e).tail(slot) - z_next.col(j);
  }

  if (diag != nullptr) {
    diag->newton_failures = stats.failures;
    diag->last_failure_edge = stats.last_failure;
  }

  // Step 4: advance and report the stopping residual.
  const double residual = stopping_residual(edges, state.xi, z_next, state.z);
  state.z.swap(z_next);
  state.residual = residual;
  ++state.iter;
  return residual;
}

FitResult fit(const ObservationSet& observations, const FunctionClass& function_class,
              const AdmmConfig& config, const std::optional<Eigen::MatrixXd>& warm_start) {
  if (config.max_iters < 1) {
    throw Error("max_iters must be >= 1");
  }
  if (!(config.eps > 0.0)) {
    throw Error("eps must be positive");
  }
  const double rho =
      config.rho.value_or(1.0 / static_cast<double>(observations.n()));
  const AdmmProblem problem(observations, function_class, rho);
  AdmmState state = problem.initial_state(warm_start);

  const Eigen::Index d = observations.d();
  std::vector<IterationRecord> trace;
  trace.reserve(static_cast<std::size_t>(std::min(config.max_iters, 1 << 20)));

  bool converged = false;
  long failures = 0;
  std::pair<int, int> last_failure{-1, -1};
  using clock = std::chrono::steady_clock;
  while (state.iter < config.max_iters) {
    const auto tic = clock::now();
    StepDiagnostics step_diag;
    const double residual = admm_step(state, problem, config, &step_diag);
    failures += step_diag.newton_failures;
    if (step_diag.last_failure_edge.first >= 0) {
      last_failure = step_diag.last_failure_edge;
    }
    const double seconds = std::chrono::duration<double>(clock::now() - tic).count();
    const double objective =
        (observations.values() - state.z.row(0).transpose()).squaredNorm();
    trace.push_back({state.iter, residual, objective, seconds});
    if (residual <= config.eps) {
      converged = true;
      break;
    }
  }

  SiteMatrix gradients = state.z.bottomRows(d);
  Eigen::VectorXd values = state.z.row(0).transpose();
  FitResult result{
      CertifiedModel(observations.points(), std::move(values), std::move(gradients),
                     function_class),
      converged,
      state.iter,
      state.residual,
      std::move(trace),
      failures,
      last_failure,
  };
  return result;
}

}  // namespace cvxreg
