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

#ifndef SATMPC_OCP_HPP
#define SATMPC_OCP_HPP

#include <vector>

#include "satmpc/model.hpp"
#include "satmpc/types.hpp"

namespace satmpc {

/**
 * Finite-horizon regulation problem
 *
 *   min_U  x(N)' P x(N) + sum_{k<N} x(k)' Q x(k) + u(k)' R u(k)
 *   s.t.   x(k+1) = f(x(k), u(k)),  u(k) in U,  x(k) in X (k = 1..N-1),
 *          x(N)' P x(N) <= alpha,  x(N) in X.
 *
 * The dynamics are eliminated by single shooting, so U is the only decision
 * variable.
 */
struct OcpSpec {
  int horizon = 0;
  Matrix Q;
  Matrix R;
  Matrix P;
  double alpha = 0.0;
  Vector x_lower;
  Vector x_upper;
  Vector u_lower;
  Vector u_upper;

  int state_dim() const { return static_cast<int>(Q.rows()); }
  int input_dim() const { return static_cast<int>(R.rows()); }
  int num_decisions() const { return horizon * input_dim(); }

  /// Checks shapes, symmetry and positive definiteness of Q/R/P, that the
  /// origin is interior to both boxes, alpha > 0, and that the terminal
  /// ellipsoid fits in the state box. Throws ContractViolation.
  void validate() const;
};

/// N = 12, Q = 0.05 I, R = 0.1, P = [5.9353 5.2774; 5.2774 5.9353],
/// alpha = 0.0606, x in [-2, 2]^2, u in [-0.5, 0.5].
OcpSpec benchmark_ocp();

double stage_cost(const OcpSpec& spec, const StateVec& x, const InputVec& u);
double terminal_cost(const OcpSpec& spec, const StateVec& x);

/// x'Px <= alpha and x inside the state box.
bool in_terminal_set(const OcpSpec& spec, const StateVec& x);
bool in_state_box(const OcpSpec& spec, const StateVec& x);

/// Input u(k) as a view into the stacked decision vector.
inline auto input_at(const DecisionVector& U, int k, int m) {
  return U.segment(static_cast<Eigen::Index>(k) * m, m);
}

struct Rollout {
  /// x(0), ..., x(N).
  std::vector<StateVec> states;
};

Rollout rollout(const DynamicsModel& model, const StateVec& x0,
                const DecisionVector& U);

double total_cost(const OcpSpec& spec, const DynamicsModel& model,
                  const StateVec& x0, const DecisionVector& U);

/**
 * Row layout of the stacked constraint vector G(x0, U) <= 0.
 *
 *   for k = 0..N-1:  u_lower - u(k)   (m rows),  u(k) - u_upper  (m rows)
 *   for k = 1..N-1:  x_lower - x(k)   (n rows),  x(k) - x_upper  (n rows)
 *   x(N)'P x(N) - alpha                (1 row)
 *   x_lower - x(N)  (n rows),  x(N) - x_upper  (n rows)
 */
class ConstraintLayout {
 public:
  ConstraintLayout(int horizon, int state_dim, int input_dim);
  explicit ConstraintLayout(const OcpSpec& spec)
      : ConstraintLayout(spec.horizon, spec.state_dim(), spec.input_dim()) {}

  int size() const { return size_; }
  int input_rows() const { return 2 * m_ * N_; }

  int input_lower(int k, int j) const { return 2 * m_ * k + j; }
  int input_upper(int k, int j) const { return 2 * m_ * k + m_ + j; }
  /// k in 1..N-1.
  int state_lower(int k, int i) const { return input_rows() + 2 * n_ * (k - 1) + i; }
  int state_upper(int k, int i) const { return state_lower(k, i) + n_; }
  int terminal_ellipse() const { return input_rows() + 2 * n_ * (N_ - 1); }
  int terminal_lower(int i) const { return terminal_ellipse() + 1 + i; }
  int terminal_upper(int i) const { return terminal_ellipse() + 1 + n_ + i; }

  bool is_input_row(int row) const { return row < input_rows(); }

 private:
  int N_;
  int n_;
  int m_;
  int size_;
};

Vector constraints(const OcpSpec& spec, const DynamicsModel& model,
                   const StateVec& x0, const DecisionVector& U);

/// Cost, constraints and their first derivatives with respect to U.
struct ShootingEvaluation {
  Rollout traj;
  double cost = 0.0;
  Vector gradient;   ///< dV/dU, length N*m
  Vector g;          ///< G(x0, U)
  Matrix jacobian;   ///< dG/dU, rows follow ConstraintLayout
};

/// Forward-sensitivity evaluation of V, G and their gradients.
ShootingEvaluation evaluate_shooting(const OcpSpec& spec,
                                     const DynamicsModel& model,
                                     const StateVec& x0,
                                     const DecisionVector& U);

/// Cost and constraints only (no derivatives); cheaper inside line searches.
void evaluate_values(const OcpSpec& spec, const DynamicsModel& model,
                     const StateVec& x0, const DecisionVector& U,
                     double& cost, Vector& g);

/// Gradient of the Lagrangian V + lambda' G with respect to U, computed by a
/// backward adjoint sweep. With lambda = 0 this is dV/dU.
Vector lagrangian_gradient(const OcpSpec& spec, const DynamicsModel& model,
                           const StateVec& x0, const DecisionVector& U,
                           const Vector& lambda);

/// Exact Hessian of V + lambda' G with respect to U: stage-wise second
/// derivatives of the Hamiltonian (costates from the adjoint sweep) projected
/// through the forward sensitivities dx(k)/dU.
Matrix lagrangian_hessian(const OcpSpec& spec, const DynamicsModel& model,
                          const StateVec& x0, const DecisionVector& U,
                          const Vector& lambda);

}  // namespace satmpc

#endif  // SATMPC_OCP_HPP
