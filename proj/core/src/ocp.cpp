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

#include "satmpc/ocp.hpp"

#include <cmath>

#include <fmt/format.h>

namespace satmpc {

namespace {

void require_spd(const Matrix& M, const char* name) {
  require(M.rows() == M.cols() && M.rows() > 0,
          fmt::format("OcpSpec: {} must be square and non-empty", name));
  require(M.allFinite(), fmt::format("OcpSpec: {} must be finite", name));
  require((M - M.transpose()).cwiseAbs().maxCoeff() <=
              1e-12 * (1.0 + M.cwiseAbs().maxCoeff()),
          fmt::format("OcpSpec: {} must be symmetric", name));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(M, Eigen::EigenvaluesOnly);
  require(eig.eigenvalues().minCoeff() > 0.0,
          fmt::format("OcpSpec: {} must be positive definite", name));
}

void check_state(const OcpSpec& spec, const StateVec& x) {
  require(x.size() == spec.state_dim(),
          fmt::format("state has size {}, expected {}", x.size(), spec.state_dim()));
}

void check_decisions(const OcpSpec& spec, const DecisionVector& U) {
  require(U.size() == spec.num_decisions(),
          fmt::format("decision vector has size {}, expected N*m = {}", U.size(),
                      spec.num_decisions()));
  require(U.allFinite(), "decision vector must be finite");
}

}  // namespace

void OcpSpec::validate() const {
  require(horizon >= 1, "OcpSpec: horizon must be at least 1");
  require_spd(Q, "Q");
  require_spd(R, "R");
  require_spd(P, "P");
  const int n = state_dim();
  const int m = input_dim();
  require(P.rows() == n, "OcpSpec: P and Q must have the same size");
  require(x_lower.size() == n && x_upper.size() == n,
          "OcpSpec: state bounds must have length n");
  require(u_lower.size() == m && u_upper.size() == m,
          "OcpSpec: input bounds must have length m");
  require((x_lower.array() < 0.0).all() && (x_upper.array() > 0.0).all(),
          "OcpSpec: the origin must be interior to the state box");
  require((u_lower.array() < 0.0).all() && (u_upper.array() > 0.0).all(),
          "OcpSpec: the origin must be interior to the input box");
  require(std::isfinite(alpha) && alpha > 0.0, "OcpSpec: alpha must be positive");
  // max x_i over {x'Px <= alpha} is sqrt(alpha * (P^-1)_ii).
  const Matrix Pinv = P.llt().solve(Matrix::Identity(n, n));
  for (int i = 0; i < n; ++i) {
    const double reach = std::sqrt(alpha * Pinv(i, i));
    require(reach <= x_upper(i) && -reach >= x_lower(i),
            fmt::format("OcpSpec: terminal ellipsoid leaves the state box along "
                        "coordinate {}",
                        i));
  }
}

OcpSpec benchmark_ocp() {
  OcpSpec s;
  s.horizon = 12;
  s.Q = Matrix::Identity(2, 2) * 0.05;
  s.R = Matrix::Constant(1, 1, 0.1);
  s.P.resize(2, 2);
  s.P << 5.9353, 5.2774, 5.2774, 5.9353;
  s.alpha = 0.0606;
  s.x_lower = Vector::Constant(2, -2.0);
  s.x_upper = Vector::Constant(2, 2.0);
  s.u_lower = Vector::Constant(1, -0.5);
  s.u_upper = Vector::Constant(1, 0.5);
  return s;
}

double stage_cost(const OcpSpec& spec, const StateVec& x, const InputVec& u) {
  check_state(spec, x);
  require(u.size() == spec.input_dim(), "stage_cost: input has wrong size");
  return x.dot(spec.Q * x) + u.dot(spec.R * u);
}

double terminal_cost(const OcpSpec& spec, const StateVec& x) {
  check_state(spec, x);
  return x.dot(spec.P * x);
}

bool in_state_box(const OcpSpec& spec, const StateVec& x) {
  check_state(spec, x);
  return (x.array() >= spec.x_lower.array()).all() &&
         (x.array() <= spec.x_upper.array()).all();
}

bool in_terminal_set(const OcpSpec& spec, const StateVec& x) {
  return in_state_box(spec, x) && terminal_cost(spec, x) <= spec.alpha;
}

Rollout rollout(const DynamicsModel& model, const StateVec& x0,
                const DecisionVector& U) {
  const int m = model.input_dim();
  require(x0.size() == model.state_dim(), "rollout: x0 has wrong size");
  require(U.size() % m == 0 && U.size() > 0,
          "rollout: decision vector length must be a positive multiple of m");
  const int N = static_cast<int>(U.size()) / m;
  Rollout r;
  r.states.reserve(N + 1);
  r.states.push_back(x0);
  for (int k = 0; k < N; ++k) {
    r.states.push_back(model.step(r.states.back(), input_at(U, k, m)));
  }
  return r;
}

double total_cost(const OcpSpec& spec, const DynamicsModel& model,
                  const StateVec& x0, const DecisionVector& U) {
  double cost = 0.0;
  Vector g;
  evaluate_values(spec, model, x0, U, cost, g);
  return cost;
}

ConstraintLayout::ConstraintLayout(int horizon, int state_dim, int input_dim)
    : N_(horizon), n_(state_dim), m_(input_dim) {
  require(N_ >= 1 && n_ >= 1 && m_ >= 1, "ConstraintLayout: bad dimensions");
  size_ = 2 * m_ * N_ + 2 * n_ * (N_ - 1) + 1 + 2 * n_;
}

namespace {

void fill_constraint_values(const OcpSpec& spec, const ConstraintLayout& layout,
                            const Rollout& traj, const DecisionVector& U,
                            Vector& g) {
  const int N = spec.horizon;
  const int n = spec.state_dim();
  const int m = spec.input_dim();
  g.resize(layout.size());
  for (int k = 0; k < N; ++k) {
    for (int j = 0; j < m; ++j) {
      const double u = U(k * m + j);
      g(layout.input_lower(k, j)) = spec.u_lower(j) - u;
      g(layout.input_upper(k, j)) = u - spec.u_upper(j);
    }
  }
  for (int k = 1; k < N; ++k) {
    for (int i = 0; i < n; ++i) {
      g(layout.state_lower(k, i)) = spec.x_lower(i) - traj.states[k](i);
      g(layout.state_upper(k, i)) = traj.states[k](i) - spec.x_upper(i);
    }
  }
  const StateVec& xN = traj.states[N];
  g(layout.terminal_ellipse()) = xN.dot(spec.P * xN) - spec.alpha;
  for (int i = 0; i < n; ++i) {
    g(layout.terminal_lower(i)) = spec.x_lower(i) - xN(i);
    g(layout.terminal_upper(i)) = xN(i) - spec.x_upper(i);
  }
}

Rollout rollout_unchecked(const DynamicsModel& model, const StateVec& x0,
                          const DecisionVector& U, int N, int m) {
  Rollout r;
  r.states.reserve(N + 1);
  r.states.push_back(x0);
  for (int k = 0; k < N; ++k) {
    r.states.push_back(model.step_unchecked(r.states.back(), U.segment(k * m, m)));
  }
  return r;
}

void check_problem(const OcpSpec& spec, const DynamicsModel& model,
                   const StateVec& x0, const DecisionVector& U) {
  require(model.state_dim() == spec.state_dim() &&
              model.input_dim() == spec.input_dim(),
          "model and OcpSpec dimensions disagree");
  check_state(spec, x0);
  require(x0.allFinite(), "initial state must be finite");
  check_decisions(spec, U);
}

}  // namespace

Vector constraints(const OcpSpec& spec, const DynamicsModel& model,
                   const StateVec& x0, const DecisionVector& U) {
  double cost = 0.0;
  Vector g;
  evaluate_values(spec, model, x0, U, cost, g);
  return g;
}

void evaluate_values(const OcpSpec& spec, const DynamicsModel& model,
                     const StateVec& x0, const DecisionVector& U, double& cost,
                     Vector& g) {
  check_problem(spec, model, x0, U);
  const int N = spec.horizon;
  const int m = spec.input_dim();
  const Rollout traj = rollout_unchecked(model, x0, U, N, m);
  cost = 0.0;
  for (int k = 0; k < N; ++k) {
    const auto u = U.segment(k * m, m);
    cost += traj.states[k].dot(spec.Q * traj.states[k]) + u.dot(spec.R * u);
  }
  cost += traj.states[N].dot(spec.P * traj.states[N]);
  fill_constraint_values(spec, ConstraintLayout(spec), traj, U, g);
}

ShootingEvaluation evaluate_shooting(const OcpSpec& spec,
                                     const DynamicsModel& model,
                                     const StateVec& x0,
                                     const DecisionVector& U) {
  check_problem(spec, model, x0, U);
  const int N = spec.horizon;
  const int n = spec.state_dim();
  const int m = spec.input_dim();
  const int nu = N * m;
  const ConstraintLayout layout(spec);

  ShootingEvaluation ev;
  ev.traj = rollout_unchecked(model, x0, U, N, m);
  fill_constraint_values(spec, layout, ev.traj, U, ev.g);
  ev.gradient = Vector::Zero(nu);
  ev.jacobian = Matrix::Zero(layout.size(), nu);
  ev.cost = 0.0;

  // S = dx(k)/dU, propagated as S(k+1) = A(k) S(k) + B(k) E(k).
  Matrix S = Matrix::Zero(n, nu);
  Matrix A;
  Matrix B;
  for (int k = 0; k < N; ++k) {
    const StateVec& x = ev.traj.states[k];
    const auto u = U.segment(k * m, m);
    const Vector Qx = spec.Q * x;
    const Vector Ru = spec.R * u;
    ev.cost += x.dot(Qx) + u.dot(Ru);
    ev.gradient.noalias() += 2.0 * S.transpose() * Qx;
    ev.gradient.segment(k * m, m) += 2.0 * Ru;

    for (int j = 0; j < m; ++j) {
      ev.jacobian(layout.input_lower(k, j), k * m + j) = -1.0;
      ev.jacobian(layout.input_upper(k, j), k * m + j) = 1.0;
    }
    if (k >= 1) {
      for (int i = 0; i < n; ++i) {
        ev.jacobian.row(layout.state_lower(k, i)) = -S.row(i);
        ev.jacobian.row(layout.state_upper(k, i)) = S.row(i);
      }
    }

    model.jacobians(x, u, A, B);
    S = A * S;
    S.middleCols(k * m, m) += B;
  }
  const StateVec& xN = ev.traj.states[N];
  const Vector PxN = spec.P * xN;
  ev.cost += xN.dot(PxN);
  ev.gradient.noalias() += 2.0 * S.transpose() * PxN;
  ev.jacobian.row(layout.terminal_ellipse()) = 2.0 * (S.transpose() * PxN).transpose();
  for (int i = 0; i < n; ++i) {
    ev.jacobian.row(layout.terminal_lower(i)) = -S.row(i);
    ev.jacobian.row(layout.terminal_upper(i)) = S.row(i);
  }
  return ev;
}

Vector lagrangian_gradient(const OcpSpec& spec, const DynamicsModel& model,
                           const StateVec& x0, const DecisionVector& U,
                           const Vector& lambda) {
  check_problem(spec, model, x0, U);
  const int N = spec.horizon;
  const int n = spec.state_dim();
  const int m = spec.input_dim();
  const ConstraintLayout layout(spec);
  require(lambda.size() == layout.size(), "lagrangian_gradient: multiplier size");

  const Rollout traj = rollout_unchecked(model, x0, U, N, m);
  std::vector<Matrix> As(N);
  std::vector<Matrix> Bs(N);
  for (int k = 0; k < N; ++k) {
    model.jacobians(traj.states[k], U.segment(k * m, m), As[k], Bs[k]);
  }

  const StateVec& xN = traj.states[N];
  Vector costate = 2.0 * (1.0 + lambda(layout.terminal_ellipse())) * (spec.P * xN);
  for (int i = 0; i < n; ++i) {
    costate(i) += lambda(layout.terminal_upper(i)) - lambda(layout.terminal_lower(i));
  }

  Vector grad(N * m);
  for (int k = N - 1; k >= 0; --k) {
    const auto u = U.segment(k * m, m);
    Vector gu = 2.0 * (spec.R * u) + Bs[k].transpose() * costate;
    for (int j = 0; j < m; ++j) {
      gu(j) += lambda(layout.input_upper(k, j)) - lambda(layout.input_lower(k, j));
    }
    grad.segment(k * m, m) = gu;

    Vector next = As[k].transpose() * costate;
    next += 2.0 * (spec.Q * traj.states[k]);
    if (k >= 1) {
      for (int i = 0; i < n; ++i) {
        next(i) += lambda(layout.state_upper(k, i)) - lambda(layout.state_lower(k, i));
      }
    }
    costate = std::move(next);
  }
  return grad;
}

Matrix lagrangian_hessian(const OcpSpec& spec, const DynamicsModel& model,
                          const StateVec& x0, const DecisionVector& U,
                          const Vector& lambda) {
  check_problem(spec, model, x0, U);
  const int N = spec.horizon;
  const int n = spec.state_dim();
  const int m = spec.input_dim();
  const int nu = N * m;
  const ConstraintLayout layout(spec);
  require(lambda.size() == layout.size(), "lagrangian_hessian: multiplier size");

  const Rollout traj = rollout_unchecked(model, x0, U, N, m);
  std::vector<Matrix> As(N);
  std::vector<Matrix> Bs(N);
  std::vector<Matrix> S(N + 1);
  S[0] = Matrix::Zero(n, nu);
  for (int k = 0; k < N; ++k) {
    model.jacobians(traj.states[k], U.segment(k * m, m), As[k], Bs[k]);
    S[k + 1] = As[k] * S[k];
    S[k + 1].middleCols(k * m, m) += Bs[k];
  }

  const double terminal_weight = 2.0 * (1.0 + lambda(layout.terminal_ellipse()));
  const StateVec& xN = traj.states[N];
  Matrix H = S[N].transpose() * (terminal_weight * spec.P) * S[N];

  // costate = dL/dx(k+1), swept backwards.
  Vector costate = terminal_weight * (spec.P * xN);
  for (int i = 0; i < n; ++i) {
    costate(i) += lambda(layout.terminal_upper(i)) - lambda(layout.terminal_lower(i));
  }

  Matrix Hxx, Hxu, Huu;
  Matrix Z(n + m, nu);
  Matrix W(n + m, n + m);
  for (int k = N - 1; k >= 0; --k) {
    model.weighted_hessian(traj.states[k], U.segment(k * m, m), costate, Hxx, Hxu, Huu);
    W.topLeftCorner(n, n) = 2.0 * spec.Q + Hxx;
    W.topRightCorner(n, m) = Hxu;
    W.bottomLeftCorner(m, n) = Hxu.transpose();
    W.bottomRightCorner(m, m) = 2.0 * spec.R + Huu;
    Z.topRows(n) = S[k];
    Z.bottomRows(m).setZero();
    Z.bottomRows(m).middleCols(k * m, m) = Matrix::Identity(m, m);
    H.noalias() += Z.transpose() * W * Z;

    Vector next = As[k].transpose() * costate;
    next += 2.0 * (spec.Q * traj.states[k]);
    if (k >= 1) {
      for (int i = 0; i < n; ++i) {
        next(i) += lambda(layout.state_upper(k, i)) - lambda(layout.state_lower(k, i));
      }
    }
    costate = std::move(next);
  }
  return 0.5 * (H + H.transpose());
}

}  // namespace satmpc
