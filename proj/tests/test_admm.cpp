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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Core>
#include <set>

#include "cvxreg/admm.hpp"
#include "cvxreg/constraints.hpp"
#include "cvxreg/harness.hpp"
#include "test_util.hpp"

using namespace cvxreg;

TEST_CASE("edge set enumerates ordered pairs lexicographically") {
  const EdgeSet two = build_edge_set(2);
  REQUIRE(two.count() == 2);
  CHECK(two.edges[0] == std::make_pair(0, 1));
  CHECK(two.edges[1] == std::make_pair(1, 0));

  const EdgeSet three = build_edge_set(3);
  CHECK(three.count() == 6);
  int slots_of_node1 = 0;
  for (const auto& [i, j] : three.edges) {
    if (i == 1 || j == 1) ++slots_of_node1;
  }
  CHECK(slots_of_node1 == 4);  // 2(n-1)

  const EdgeSet ten = build_edge_set(10);
  CHECK(ten.count() == 90);
  const std::set<std::pair<int, int>> unique(ten.edges.begin(), ten.edges.end());
  CHECK(unique.size() == 90);

  CHECK_THROWS_AS(build_edge_set(1), TooFewPointsError);
}

TEST_CASE("stopping residual equals the brute-force slot maximum exactly") {
  test::Rng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = rng.integer(2, 6);
    const Eigen::Index d = rng.integer(1, 3);
    const EdgeSet edges = build_edge_set(n);
    const Eigen::MatrixXd xi = rng.matrix(2 * (1 + d), edges.count(), -2.0, 2.0);
    const Eigen::MatrixXd z_plus = rng.matrix(1 + d, n, -2.0, 2.0);
    const Eigen::MatrixXd z_prev = rng.matrix(1 + d, n, -2.0, 2.0);

    double want = 0.0;
    for (Eigen::Index r = 0; r < z_plus.rows(); ++r) {
      for (Eigen::Index c = 0; c < z_plus.cols(); ++c) {
        want = std::max(want, std::abs(z_plus(r, c) - z_prev(r, c)));
      }
    }
    for (Eigen::Index e = 0; e < edges.count(); ++e) {
      const auto [i, j] = edges.edges[static_cast<std::size_t>(e)];
      for (Eigen::Index r = 0; r < 1 + d; ++r) {
        want = std::max(want, std::abs(xi(r, e) - z_plus(r, i)));
        want = std::max(want, std::abs(xi(1 + d + r, e) - z_plus(r, j)));
      }
    }
    CHECK(stopping_residual(edges, xi, z_plus, z_prev) == want);
  }
}

TEST_CASE("consensus state is a fixed point of the z and lambda updates") {
  test::Rng rng(67);
  const Eigen::Index n = 4, d = 1;
  const EdgeSet edges = build_edge_set(n);
  const Eigen::MatrixXd z = rng.matrix(1 + d, n);
  Eigen::MatrixXd xi(2 * (1 + d), edges.count());
  for (Eigen::Index e = 0; e < edges.count(); ++e) {
    const auto [i, j] = edges.edges[static_cast<std::size_t>(e)];
    xi.col(e).head(1 + d) = z.col(i);
    xi.col(e).tail(1 + d) = z.col(j);
  }
  // Exact-average z-update over the 2(n-1) slots of each node.
  Eigen::MatrixXd z_next = Eigen::MatrixXd::Zero(1 + d, n);
  for (Eigen::Index e = 0; e < edges.count(); ++e) {
    const auto [i, j] = edges.edges[static_cast<std::size_t>(e)];
    z_next.col(i) += xi.col(e).head(1 + d);
    z_next.col(j) += xi.col(e).tail(1 + d);
  }
  z_next /= 2.0 * static_cast<double>(n - 1);
  CHECK((z_next - z).lpNorm<Eigen::Infinity>() <= 1e-15);
  // lambda increments eta - z_next vanish, and so does the residual.
  CHECK(stopping_residual(edges, xi, z_next, z) <= 1e-15);
}

TEST_CASE("one step matches a hand-rolled sequential implementation slot by slot") {
  const ObservationSet obs = synth_quadratic(2, 0.3, 99);
  const FunctionClass cls(1.0, 5.0);
  const double rho = 0.5;

  AdmmConfig config;
  config.rho = rho;
  config.eps = 1e-10;

  const AdmmProblem problem(obs, cls, rho);
  AdmmState state = problem.initial_state();
  // Make the duals nontrivial so all update terms participate.
  test::Rng rng(71);
  state.lambda = rng.matrix(state.lambda.rows(), state.lambda.cols(), -0.3, 0.3);
  const AdmmState start = state;

  admm_step(state, problem, config);

  // Straight-line reference: assemble and solve each edge, exact-average z,
  // then the scaled-dual update.
  NewtonOptions newton;
  newton.tol = config.newton_tol;
  newton.max_iters = config.max_newton_iters;
  const EdgeSet edges = build_edge_set(2);
  const Eigen::Index slot = 2;
  Eigen::MatrixXd xi_ref(2 * slot, 2);
  for (Eigen::Index e = 0; e < 2; ++e) {
    const auto [i, j] = edges.edges[static_cast<std::size_t>(e)];
    const EdgeProblem prob = assemble_edge_problem(
        obs.site(i), obs.site(j), obs.value(i), obs.value(j), start.z.col(i),
        start.z.col(j), start.lambda.col(2 * e), start.lambda.col(2 * e + 1), rho,
        obs.n(), cls, i, j);
    xi_ref.col(e) = solve_edge(prob, newton).xi;
  }
  Eigen::MatrixXd z_ref = Eigen::MatrixXd::Zero(slot, 2);
  for (Eigen::Index e = 0; e < 2; ++e) {
    const auto [i, j] = edges.edges[static_cast<std::size_t>(e)];
    z_ref.col(i) += xi_ref.col(e).head(slot);
    z_ref.col(j) += xi_ref.col(e).tail(slot);
  }
  z_ref /= 2.0;  // 2(n-1) slots per node
  Eigen::MatrixXd lambda_ref = start.lambda;
  for (Eigen::Index e = 0; e < 2; ++e) {
    const auto [i, j] = edges.edges[static_cast<std::size_t>(e)];
    lambda_ref.col(2 * e) += xi_ref.col(e).head(slot) - z_ref.col(i);
    lambda_ref.col(2 * e + 1) += xi_ref.col(e).tail(slot) - z_ref.col(j);
  }

  CHECK((state.xi - xi_ref).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((state.z - z_ref).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((state.lambda - lambda_ref).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK(state.residual ==
        doctest::Approx(stopping_residual(edges, xi_ref, z_ref, start.z)).epsilon(1e-12));
}

TEST_CASE("noiseless convex data is recovered exactly (mu = 0, L = inf)") {
  const ObservationSet obs = synth_quadratic(3, 0.0, 0);
  AdmmConfig config;
  config.eps = 1e-8;
  const FitResult result = fit(obs, FunctionClass::with_infinite_L(0.0), config);
  CHECK(result.converged);
  CHECK((result.model.values() - obs.values()).lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("scaled duals average to zero per node under exact averaging") {
  const ObservationSet obs = synth_quadratic(5, 0.2, 3);
  const FunctionClass cls(1.0, 5.0);
  AdmmConfig config;
  const AdmmProblem problem(obs, cls, 0.2);
  AdmmState state = problem.initial_state();
  for (int it = 0; it < 5; ++it) {
    admm_step(state, problem, config);
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(state.z.rows(), obs.n());
    for (Eigen::Index e = 0; e < problem.edge_set().count(); ++e) {
      const auto [i, j] = problem.edge_set().edges[static_cast<std::size_t>(e)];
      mean.col(i) += state.lambda.col(2 * e);
      mean.col(j) += state.lambda.col(2 * e + 1);
    }
    mean /= 2.0 * static_cast<double>(obs.n() - 1);
    CHECK(mean.lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("identical runs produce identical traces; workers do not change z") {
  const ObservationSet obs = synth_quadratic(6, 0.1, 5);
  const FunctionClass cls(1.0, 5.0);
  AdmmConfig config;
  config.eps = 1e-5;

  const FitResult a = fit(obs, cls, config);
  const FitResult b = fit(obs, cls, config);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    CHECK(a.trace[k].residual == b.trace[k].residual);
    CHECK(a.trace[k].objective == b.trace[k].objective);
  }
  CHECK((a.model.values() - b.model.values()).lpNorm<Eigen::Infinity>() == 0.0);

  AdmmConfig threaded = config;
  threaded.workers = 4;
  const FitResult c = fit(obs, cls, threaded);
  CHECK(a.trace.size() == c.trace.size());
  CHECK((a.model.values() - c.model.values()).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((a.model.gradients() - c.model.gradients()).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("residual reaches 1e-4 within 5000 iterations at rho = 1/n") {
  for (const Eigen::Index n : {5, 12, 20}) {
    const ObservationSet obs = synth_quadratic(n, 0.1, 100 + n);
    AdmmConfig config;
    config.eps = 1e-4;
    config.max_iters = 5000;
    const FitResult result = fit(obs, FunctionClass(1.0, 5.0), config);
    CHECK(result.converged);
  }
}

TEST_CASE("objective settles: last 10 trace entries vary below 1e-6 relative") {
  const ObservationSet obs = synth_quadratic(6, 0.1, 8);
  AdmmConfig config;
  config.eps = 1e-6;
  const FitResult result = fit(obs, FunctionClass(1.0, 5.0), config);
  REQUIRE(result.converged);
  REQUIRE(result.trace.size() >= 10);
  double lo = 1e300, hi = -1e300;
  for (std::size_t k = result.trace.size() - 10; k < result.trace.size(); ++k) {
    lo = std::min(lo, result.trace[k].objective);
    hi = std::max(hi, result.trace[k].objective);
  }
  CHECK(hi - lo <= 1e-6 * std::max(1.0, std::abs(hi)));
}

TEST_CASE("warm start at the oracle optimum stops almost immediately") {
  const ObservationSet obs = synth_quadratic(4, 0.0, 0);
  const FunctionClass cls(1.0, 5.0);
  // The tight optimum: anything looser than eps leaves a consensus gap that
  // the first iterations must close.
  const OracleResult oracle = reference_fit_small(obs, cls, 1e-8);

  Eigen::MatrixXd warm(1 + obs.d(), obs.n());
  warm.row(0) = oracle.values.transpose();
  warm.bottomRows(obs.d()) = oracle.gradients;

  AdmmConfig config;
  config.eps = 1e-8;
  const FitResult result = fit(obs, cls, config, warm);
  CHECK(result.converged);
  CHECK(result.iterations <= 5);
}

TEST_CASE("tight-tolerance ADMM meets the oracle objective (smooth and nonsmooth)") {
  AdmmConfig config;
  config.eps = 1e-8;

  const ObservationSet noiseless = synth_quadratic(4, 0.0, 0);
  {
    const FitResult result = fit(noiseless, FunctionClass(1.0, 5.0), config);
    const OracleResult oracle = reference_fit_small(noiseless, FunctionClass(1.0, 5.0));
    const double obj =
        (noiseless.values() - result.model.values()).squaredNorm();
    CHECK(test::rel_err(obj, oracle.objective) <= 1e-3);
  }

  const ObservationSet noisy = synth_quadratic(4, 0.1, 7);
  {
    const FitResult result = fit(noisy, FunctionClass(1.0, 5.0), config);
    const OracleResult oracle = reference_fit_small(noisy, FunctionClass(1.0, 5.0));
    const double obj = (noisy.values() - result.model.values()).squaredNorm();
    CHECK(test::rel_err(obj, oracle.objective) <= 1e-3);
  }
  {
    const FunctionClass convex_only = FunctionClass::with_infinite_L(0.0);
    const FitResult result = fit(noisy, convex_only, config);
    const OracleResult oracle = reference_fit_small(noisy, convex_only);
    const double obj = (noisy.values() - result.model.values()).squaredNorm();
    CHECK(test::rel_err(obj, oracle.objective) <= 1e-3);
  }
}

TEST_CASE("paper-faithful z-update mode is plumbed through and differs") {
  const ObservationSet obs = synth_quadratic(4, 0.1, 11);
  AdmmConfig exact;
  exact.eps = 1e-3;
  AdmmConfig paper = exact;
  paper.z_update_mode = ZUpdateMode::PaperFaithful;

  const AdmmProblem problem(obs, FunctionClass(1.0, 5.0), 0.25);
  AdmmState se = problem.initial_state();
  AdmmState sp = problem.initial_state();
  admm_step(se, problem, exact);
  admm_step(sp, problem, paper);
  // Same edge solves, different consensus denominator: 2(n-1) vs 2n.
  CHECK((se.xi - sp.xi).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((se.z * (2.0 * 3.0) - sp.z * (2.0 * 4.0)).lpNorm<Eigen::Infinity>() <= 1e-12);
}
