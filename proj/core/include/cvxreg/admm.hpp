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
#include <optional>
#include <utility>
#include <vector>

#include "cvxreg/edge_qcqp.hpp"
#include "cvxreg/types.hpp"

namespace cvxreg {

/// All ordered pairs (i, j), i != j, in lexicographic order; |E| = n(n-1).
/// Every node occupies exactly 2(n-1) edge slots.
struct EdgeSet {
  std::vector<std::pair<int, int>> edges;
  int n = 0;

  Eigen::Index count() const { return static_cast<Eigen::Index>(edges.size()); }
};

EdgeSet build_edge_set(Eigen::Index n);

enum class ZUpdateMode {
  /// z_i = mean of its 2(n-1) edge copies; the exact consensus average.
  ExactAverage,
  /// z_i = (sum of edge copies) / (2n); the update as published.
  PaperFaithful,
};

struct AdmmConfig {
  std::optional<double> rho;  ///< penalty; defaults to 1/n when unset
  double eps = 0.01;          ///< stopping threshold on the consensus residual
  int max_iters = 100000;
  ZUpdateMode z_update_mode = ZUpdateMode::ExactAverage;
  double newton_tol = 1e-9;   ///< inner dual-solver tolerance
  int max_newton_iters = 50;
  int workers = 1;            ///< edge-sweep worker threads
};

/// Iterate state. xi stacks [eta_{e,src}; eta_{e,snk}] per edge column;
/// lambda holds two (1+d) slots per edge, column 2e for the source and
/// 2e+1 for the sink; z holds one (1+d) consensus column per node with the
/// value slot first.
struct AdmmState {
  Eigen::MatrixXd xi;      // 2(1+d) x |E|
  Eigen::MatrixXd z;       // (1+d) x n
  Eigen::MatrixXd lambda;  // (1+d) x 2|E|
  double rho = 0.0;
  long iter = 0;
  double residual = std::numeric_limits<double>::infinity();
};

/// Immutable per-fit precomputation: the edge set, the shared diagonal of P0
/// and constraint matrix P1, and the per-edge constraint vectors (q1, r1),
/// none of which change across iterations.
class AdmmProblem {
 public:
  AdmmProblem(const ObservationSet& observations, const FunctionClass& function_class,
              double rho);

  const ObservationSet& observations() const { return observations_; }
  const FunctionClass& function_class() const { return class_; }
  const EdgeSet& edge_set() const { return edges_; }
  double rho() const { return rho_; }
  Eigen::Index dim() const { return p0_diag_.size(); }

  /// Fresh state with lambda = 0 and z from the warm start, or from the raw
  /// observations (value slot = y_i, gradient slots = 0) when absent.
  AdmmState initial_state(const std::optional<Eigen::MatrixXd>& warm_start = {}) const;

  /// Builds the full standard-form problem of one edge (test/diagnostic path;
  /// the sweep itself fills a reused EdgeProblem in place).
  EdgeProblem edge_problem(Eigen::Index e, const AdmmState& state) const;

  const Eigen::VectorXd& p0_diag() const { return p0_diag_; }
  const Eigen::MatrixXd& P1() const { return P1_; }
  const Eigen::MatrixXd& q1() const { return q1_; }  // dim x |E|
  const Eigen::VectorXd& r1() const { return r1_; }  // |E|

 private:
  ObservationSet observations_;
  FunctionClass class_;
  EdgeSet edges_;
  double rho_;
  Eigen::VectorXd p0_diag_;
  Eigen::MatrixXd P1_;
  Eigen::MatrixXd q1_;
  Eigen::VectorXd r1_;
};

struct IterationRecord {
  long iter = 0;
  double residual = 0.0;
  double objective = 0.0;  ///< sum_i (y_i - z_i[value])^2
  double seconds = 0.0;    ///< wall time of this iteration
};

struct FitResult {
  CertifiedModel model;  ///< triplets read from z; never marked certified here
  bool converged = false;
  long iterations = 0;
  double final_residual = 0.0;
  std::vector<IterationRecord> trace;
  long newton_failure_count = 0;          ///< inner solves that hit max_iters
  std::pair<int, int> last_failure_edge{-1, -1};
};

struct StepDiagnostics {
  long newton_failures = 0;
  std::pair<int, int> last_failure_edge{-1, -1};
};

/// One ADMM iteration: edge sweep, z-update, lambda-update, residual.
/// Returns the stopping residual and advances state.iter.
double admm_step(AdmmState& state, const AdmmProblem& problem, const AdmmConfig& config,
                 StepDiagnostics* diag = nullptr);

/// Stopping residual
///   max( max_{e, k ~ e} |eta_{e,k} - z_k^+|_inf , |z^+ - z|_inf )
/// computed from the post-update edge copies, the new z and the previous z.
double stopping_residual(const EdgeSet& edges, const Eigen::MatrixXd& xi,
                         const Eigen::MatrixXd& z_plus, const Eigen::MatrixXd& z_prev);

/// Runs ADMM until the residual drops to config.eps or max_iters is reached.
/// The returned model is NOT certified: the consensus vector is only
/// approximately interpolable, so callers must run certify() themselves.
FitResult fit(const ObservationSet& observations, const FunctionClass& function_class,
              const AdmmConfig& config,
              const std::optional<Eigen::MatrixXd>& warm_start = {});

}  // namespace cvxreg
