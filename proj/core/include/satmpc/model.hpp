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

#ifndef SATMPC_MODEL_HPP
#define SATMPC_MODEL_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "satmpc/random.hpp"
#include "satmpc/types.hpp"

namespace satmpc {

/**
 * Discrete-time dynamics x(k+1) = f(x(k), u(k)).
 *
 * The model is immutable after construction; copies share the underlying
 * callables, and every evaluation is a pure function of its arguments, so one
 * instance may be used from several threads at once.
 *
 * Jacobians are analytic when supplied, otherwise central finite differences
 * with step 1e-6 * (1 + |z_i|) per coordinate.
 */
class DynamicsModel {
 public:
  using StepFn = std::function<StateVec(const StateVec&, const InputVec&)>;
  /// Fills A = df/dx (n x n) and B = df/du (n x m).
  using JacobianFn =
      std::function<void(const StateVec&, const InputVec&, Matrix&, Matrix&)>;
  /// Fills the blocks of sum_i w_i * Hessian(f_i) with respect to (x, u):
  /// Hxx (n x n), Hxu (n x m), Huu (m x m).
  using CurvatureFn = std::function<void(const StateVec&, const InputVec&,
                                         const Vector&, Matrix&, Matrix&, Matrix&)>;

  DynamicsModel(int state_dim, int input_dim, StepFn step_map,
                JacobianFn jacobians = nullptr, std::string name = "custom",
                CurvatureFn curvature = nullptr);

  int state_dim() const { return n_; }
  int input_dim() const { return m_; }
  const std::string& name() const { return name_; }
  bool has_analytic_jacobians() const { return static_cast<bool>(jac_); }

  /// f(x, u). Throws ContractViolation on dimension mismatch or non-finite input.
  StateVec step(const StateVec& x, const InputVec& u) const;

  /// f(x, u) + w.
  StateVec step_disturbed(const StateVec& x, const InputVec& u,
                          const DisturbanceVec& w) const;

  void jacobians(const StateVec& x, const InputVec& u, Matrix& A,
                 Matrix& B) const;

  /// Finite-difference Jacobians regardless of whether analytic ones exist.
  void finite_difference_jacobians(const StateVec& x, const InputVec& u,
                                   Matrix& A, Matrix& B) const;

  /// Weighted second derivatives sum_i w_i d2f_i/d(x,u)2. Analytic when a
  /// curvature callback was supplied, otherwise central differences of the
  /// Jacobians.
  void weighted_hessian(const StateVec& x, const InputVec& u, const Vector& w,
                        Matrix& Hxx, Matrix& Hxu, Matrix& Huu) const;

  /// Unchecked evaluation for inner loops that already validated dimensions.
  StateVec step_unchecked(const StateVec& x, const InputVec& u) const {
    return f_(x, u);
  }

 private:
  void check_dims(const StateVec& x, const InputVec& u) const;

  int n_;
  int m_;
  StepFn f_;
  JacobianFn jac_;
  std::string name_;
  CurvatureFn curv_;
};

/// The two-state, one-input bilinear benchmark
///   x1+ = x1 + 0.1 x2 + 0.1 (0.5 + 0.5 x1) u
///   x2+ = x2 + 0.1 x1 + 0.1 (0.5 - 2.0 x2) u
/// with analytic Jacobians and second derivatives.
DynamicsModel benchmark_model();

/// One term coeff * prod_j x_j^x_powers[j] * prod_l u_l^u_powers[l].
struct Monomial {
  double coeff = 0.0;
  std::vector<int> x_powers;
  std::vector<int> u_powers;
};

/// Coefficient table describing a polynomial model: rows[i] lists the
/// monomials summed into component i of f(x, u).
struct PolynomialTable {
  int state_dim = 0;
  int input_dim = 0;
  std::vector<std::vector<Monomial>> rows;

  void validate() const;
};

/// Builds a model from a polynomial table, with exact Jacobians.
DynamicsModel polynomial_model(PolynomialTable table,
                               std::string name = "polynomial");

/// The benchmark dynamics written as a polynomial table.
PolynomialTable benchmark_polynomial_table();

struct DisturbanceBounds {
  Vector lower;
  Vector upper;

  /// Throws unless lower <= upper componentwise and both are finite.
  void validate() const;
  int dim() const { return static_cast<int>(lower.size()); }
};

/// Componentwise uniform sample in [lower, upper].
DisturbanceVec sample_disturbance(const DisturbanceBounds& bounds, Rng& rng);

/// How disturbances are laid out along one trajectory.
enum class DisturbanceMode {
  /// A fresh i.i.d. draw at every time step.
  IidPerStep,
  /// One draw held for the whole trajectory.
  ConstantPerTrajectory,
};

/// Pre-generates `steps` disturbance vectors for one trajectory.
std::vector<DisturbanceVec> disturbance_sequence(const DisturbanceBounds& bounds,
                                                 DisturbanceMode mode,
                                                 int steps, Rng& rng);

}  // namespace satmpc

#endif  // SATMPC_MODEL_HPP
