// Copyright 2026 The satmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SATMPC_SOLVER_HPP
#define SATMPC_SOLVER_HPP

#include <optional>
#include <string>
#include <vector>

#include "satmpc/model.hpp"
#include "satmpc/ocp.hpp"
#include "satmpc/types.hpp"

namespace satmpc {

enum class InitPolicy {
  /// Always start from U = 0.
  Zeros,
  /// Start from the caller's warm start when one is given, else zeros.
  WarmStartShift,
};

struct SolverConfig {
  double kkt_tol = 1e-8;     ///< stationarity and complementarity
  double feas_tol = 1e-8;    ///< max_i G_i for an accepted point
  double eps_active = 1e-6;  ///< G_i >= -eps_active marks row i active
  int max_iter = 200;
  InitPolicy init_policy = InitPolicy::WarmStartShift;
  /// Restoration gives up after this many iterations without progress.
  int restoration_stall_iters = 50;
  /// When non-empty, each solve appends its iterates to this CSV file.
  std::string trace_path;

  void validate() const;
};

enum class SolveStatus { Optimal, MaxIter, Infeasible };

const char* to_string(SolveStatus status);

/// Activity flags per constraint row, plus per-step views of the input rows.
struct ActiveSet {
  std::vector<bool> rows;
  int horizon = 0;
  int input_dim = 0;
  std::vector<bool> input_lower;  ///< index k * m + j
  std::vector<bool> input_upper;

  bool lower_active(int k, int j = 0) const { return input_lower[k * input_dim + j]; }
  bool upper_active(int k, int j = 0) const { return input_upper[k * input_dim + j]; }
  int count() const;
  bool empty() const { return count() == 0; }
};

struct NlpSolution {
  DecisionVector U;
  double V = 0.0;
  SolveStatus status = SolveStatus::MaxIter;
  double kkt_residual = 0.0;
  double feas_violation = 0.0;
  ActiveSet active;
  Vector multipliers;
  int iterations = 0;
  int restoration_iterations = 0;
};

/**
 * Solves the single-shooting NLP for initial state x0.
 *
 * Sequential quadratic programming: exact Hessian of the Lagrangian
 * (eigenvalue-clipped to stay positive definite), a dual active-set QP for
 * the step, and an l1 exact-penalty line search with a second-order
 * correction. Inconsistent linearizations switch to a Gauss-Newton
 * feasibility restoration that minimizes the squared violation over the
 * input box. When it stalls above feas_tol (or reaches a stationary point of
 * the violation) the iteration restarts from inputs held at u_lower,
 * u_upper, u_lower / 2 and u_upper / 2 in turn; the problem is declared
 * Infeasible once every start has failed. A projected-gradient
 * step on a quadratic penalty is used when the QP cannot produce a descent
 * step.
 *
 * The result is a local KKT point. States outside the state box are rejected
 * as Infeasible without iterating.
 */
NlpSolution solve(const OcpSpec& spec, const DynamicsModel& model,
                  const StateVec& x0, const SolverConfig& cfg,
                  const std::optional<DecisionVector>& warm = std::nullopt);

/// Flags row i iff G_i(x0, U) >= -eps_active.
ActiveSet extract_active_set(const OcpSpec& spec, const DynamicsModel& model,
                             const StateVec& x0, const DecisionVector& U,
                             double eps_active);

/// Same, for a solver result; requires status Optimal.
ActiveSet extract_active_set(const OcpSpec& spec, const DynamicsModel& model,
                             const StateVec& x0, const NlpSolution& sol,
                             double eps_active);

/// True iff solve() from a cold start reaches status Optimal.
bool check_feasible(const OcpSpec& spec, const DynamicsModel& model,
                    const StateVec& x0, const SolverConfig& cfg);

/// KKT residuals of (U, lambda): stationarity, complementarity, violation.
struct KktReport {
  double stationarity = 0.0;
  double complementarity = 0.0;
  double violation = 0.0;
  double dual_infeasibility = 0.0;  ///< max(0, -min lambda)
  double max() const;
};

KktReport kkt_report(const OcpSpec& spec, const DynamicsModel& model,
                     const StateVec& x0, const DecisionVector& U,
                     const Vector& lambda);

struct OracleResult {
  bool feasible = false;
  DecisionVector U;
  double cost = 0.0;
  long long evaluated = 0;
};

/**
 * Exhaustive search over inputs on a uniform grid of `levels_per_input` values
 * per channel for the first `horizon_cap` steps. Steps from horizon_cap on
 * come from `tail` (a full-length decision vector) or are zero. Returns the
 * cheapest grid point with max_i G_i <= 0. Intended as a test oracle.
 */
OracleResult grid_search_oracle(const OcpSpec& spec, const DynamicsModel& model,
                                const StateVec& x0, int levels_per_input,
                                int horizon_cap,
                                const std::optional<DecisionVector>& tail = std::nullopt);

}  // namespace satmpc

#endif  // SATMPC_SOLVER_HPP
