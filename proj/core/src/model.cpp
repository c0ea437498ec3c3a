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

#include "satmpc/model.hpp"

#include <cmath>
#include <utility>

#include <fmt/format.h>

namespace satmpc {

DynamicsModel::DynamicsModel(int state_dim, int input_dim, StepFn step_map,
                             JacobianFn jacobians, std::string name,
                             CurvatureFn curvature)
    : n_(state_dim),
      m_(input_dim),
      f_(std::move(step_map)),
      jac_(std::move(jacobians)),
      name_(std::move(name)),
      curv_(std::move(curvature)) {
  require(n_ >= 1 && m_ >= 1, "DynamicsModel: dimensions must be positive");
  require(static_cast<bool>(f_), "DynamicsModel: step map is empty");
}

void DynamicsModel::check_dims(const StateVec& x, const InputVec& u) const {
  if (x.size() != n_ || u.size() != m_) {
    throw ContractViolation(
        fmt::format("{}: expected x in R^{} and u in R^{}, got sizes {} and {}",
                    name_, n_, m_, x.size(), u.size()));
  }
  require(x.allFinite() && u.allFinite(),
          name_ + ": state and input must be finite");
}

StateVec DynamicsModel::step(const StateVec& x, const InputVec& u) const {
  check_dims(x, u);
  return f_(x, u);
}

StateVec DynamicsModel::step_disturbed(const StateVec& x, const InputVec& u,
                                       const DisturbanceVec& w) const {
  check_dims(x, u);
  if (w.size() != n_) {
    throw ContractViolation(fmt::format(
        "{}: disturbance has size {}, expected {}", name_, w.size(), n_));
  }
  require(w.allFinite(), name_ + ": disturbance must be finite");
  return f_(x, u) + w;
}

void DynamicsModel::jacobians(const StateVec& x, const InputVec& u, Matrix& A,
                              Matrix& B) const {
  if (!jac_) {
    finite_difference_jacobians(x, u, A, B);
    return;
  }
  A.resize(n_, n_);
  B.resize(n_, m_);
  jac_(x, u, A, B);
}

void DynamicsModel::finite_difference_jacobians(const StateVec& x,
                                                const InputVec& u, Matrix& A,
                                                Matrix& B) const {
  A.resize(n_, n_);
  B.resize(n_, m_);
  StateVec xp = x;
  StateVec xm = x;
  for (int i = 0; i < n_; ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x(i)));
    xp(i) = x(i) + h;
    xm(i) = x(i) - h;
    A.col(i) = (f_(xp, u) - f_(xm, u)) / (2.0 * h);
    xp(i) = x(i);
    xm(i) = x(i);
  }
  InputVec up = u;
  InputVec um = u;
  for (int j = 0; j < m_; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(u(j)));
    up(j) = u(j) + h;
    um(j) = u(j) - h;
    B.col(j) = (f_(x, up) - f_(x, um)) / (2.0 * h);
    up(j) = u(j);
    um(j) = u(j);
  }
}

void DynamicsModel::weighted_hessian(const StateVec& x, const InputVec& u,
                                     const Vector& w, Matrix& Hxx, Matrix& Hxu,
                                     Matrix& Huu) const {
  Hxx.resize(n_, n_);
  Hxu.resize(n_, m_);
  Huu.resize(m_, m_);
  if (curv_) {
    curv_(x, u, w, Hxx, Hxu, Huu);
    return;
  }
  // Columns of the weighted Hessian are derivatives of w'A and w'B.
  Matrix Ap, Bp, Am, Bm;
  StateVec xp = x;
  StateVec xm = x;
  for (int i = 0; i < n_; ++i) {
    const double h = 1e-5 * (1.0 + std::abs(x(i)));
    xp(i) = x(i) + h;
    xm(i) = x(i) - h;
    jacobians(xp, u, Ap, Bp);
    jacobians(xm, u, Am, Bm);
    Hxx.col(i) = (Ap - Am).transpose() * w / (2.0 * h);
    xp(i) = x(i);
    xm(i) = x(i);
  }
  InputVec up = u;
  InputVec um = u;
  for (int j = 0; j < m_; ++j) {
    const double h = 1e-5 * (1.0 + std::abs(u(j)));
    up(j) = u(j) + h;
    um(j) = u(j) - h;
    jacobians(x, up, Ap, Bp);
    jacobians(x, um, Am, Bm);
    Hxu.col(j) = (Ap - Am).transpose() * w / (2.0 * h);
    Huu.col(j) = (Bp - Bm).transpose() * w / (2.0 * h);
    up(j) = u(j);
    um(j) = u(j);
  }
  Hxx = 0.5 * (Hxx + Hxx.transpose());
  Huu = 0.5 * (Huu + Huu.transpose());
}

DynamicsModel benchmark_model() {
  auto step = [](const StateVec& x, const InputVec& u) -> StateVec {
    StateVec next(2);
    next(0) = x(0) + 0.1 * x(1) + 0.1 * (0.5 + 0.5 * x(0)) * u(0);
    next(1) = x(1) + 0.1 * x(0) + 0.1 * (0.5 - 2.0 * x(1)) * u(0);
    return next;
  };
  auto jac = [](const StateVec& x, const InputVec& u, Matrix& A, Matrix& B) {
    A(0, 0) = 1.0 + 0.05 * u(0);
    A(0, 1) = 0.1;
    A(1, 0) = 0.1;
    A(1, 1) = 1.0 - 0.2 * u(0);
    B(0, 0) = 0.1 * (0.5 + 0.5 * x(0));
    B(1, 0) = 0.1 * (0.5 - 2.0 * x(1));
  };
  // Only the bilinear x*u terms have curvature.
  auto curvature = [](const StateVec&, const InputVec&, const Vector& w,
                      Matrix& Hxx, Matrix& Hxu, Matrix& Huu) {
    Hxx.setZero();
    Huu.setZero();
    Hxu(0, 0) = 0.05 * w(0);
    Hxu(1, 0) = -0.2 * w(1);
  };
  return DynamicsModel(2, 1, step, jac, "benchmark", curvature);
}

// ---------------------------------------------------------------------------
// Polynomial models

void PolynomialTable::validate() const {
  require(state_dim >= 1 && input_dim >= 1,
          "polynomial model: dimensions must be positive");
  require(static_cast<int>(rows.size()) == state_dim,
          fmt::format("polynomial model: expected {} rows, got {}", state_dim,
                      rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const Monomial& t : rows[i]) {
      require(std::isfinite(t.coeff),
              fmt::format("polynomial model: row {} has a non-finite coefficient", i));
      require(static_cast<int>(t.x_powers.size()) == state_dim &&
                  static_cast<int>(t.u_powers.size()) == input_dim,
              fmt::format("polynomial model: row {} has a term with wrong "
                          "exponent lengths",
                          i));
      for (int p : t.x_powers) {
        require(p >= 0, "polynomial model: negative exponent");
      }
      for (int p : t.u_powers) {
        require(p >= 0, "polynomial model: negative exponent");
      }
    }
  }
}

namespace {

double ipow(double base, int exponent) {
  double r = 1.0;
  for (int i = 0; i < exponent; ++i) r *= base;
  return r;
}

double monomial_value(const Monomial& t, const StateVec& x, const InputVec& u) {
  double v = t.coeff;
  for (int j = 0; j < x.size(); ++j) v *= ipow(x(j), t.x_powers[j]);
  for (int l = 0; l < u.size(); ++l) v *= ipow(u(l), t.u_powers[l]);
  return v;
}

// d/dz of the monomial where z is x_j (wrt_state) or u_j.
double monomial_partial(const Monomial& t, const StateVec& x, const InputVec& u,
                        bool wrt_state, int j) {
  const int p = wrt_state ? t.x_powers[j] : t.u_powers[j];
  if (p == 0) return 0.0;
  double v = t.coeff * p;
  for (int k = 0; k < x.size(); ++k) {
    const int e = t.x_powers[k] - ((wrt_state && k == j) ? 1 : 0);
    v *= ipow(x(k), e);
  }
  for (int k = 0; k < u.size(); ++k) {
    const int e = t.u_powers[k] - ((!wrt_state && k == j) ? 1 : 0);
    v *= ipow(u(k), e);
  }
  return v;
}

}  // namespace

DynamicsModel polynomial_model(PolynomialTable table, std::string name) {
  table.validate();
  auto shared = std::make_shared<const PolynomialTable>(std::move(table));
  auto step = [shared](const StateVec& x, const InputVec& u) -> StateVec {
    StateVec next = StateVec::Zero(shared->state_dim);
    for (int i = 0; i < shared->state_dim; ++i) {
      for (const Monomial& t : shared->rows[i]) next(i) += monomial_value(t, x, u);
    }
    return next;
  };
  auto jac = [shared](const StateVec& x, const InputVec& u, Matrix& A,
                      Matrix& B) {
    A.setZero();
    B.setZero();
    for (int i = 0; i < shared->state_dim; ++i) {
      for (const Monomial& t : shared->rows[i]) {
        for (int j = 0; j < shared->state_dim; ++j) {
          A(i, j) += monomial_partial(t, x, u, true, j);
        }
        for (int j = 0; j < shared->input_dim; ++j) {
          B(i, j) += monomial_partial(t, x, u, false, j);
        }
      }
    }
  };
  const int n = shared->state_dim;
  const int m = shared->input_dim;
  return DynamicsModel(n, m, step, jac, std::move(name));
}

PolynomialTable benchmark_polynomial_table() {
  PolynomialTable t;
  t.state_dim = 2;
  t.input_dim = 1;
  t.rows = {
      {
          {1.0, {1, 0}, {0}},
          {0.1, {0, 1}, {0}},
          {0.05, {0, 0}, {1}},
          {0.05, {1, 0}, {1}},
      },
      {
          {1.0, {0, 1}, {0}},
          {0.1, {1, 0}, {0}},
          {0.05, {0, 0}, {1}},
          {-0.2, {0, 1}, {1}},
      },
  };
  return t;
}

// ---------------------------------------------------------------------------
// Disturbances

void DisturbanceBounds::validate() const {
  require(lower.size() == upper.size() && lower.size() > 0,
          "disturbance bounds: lower and upper must have the same positive size");
  require(lower.allFinite() && upper.allFinite(),
          "disturbance bounds must be finite");
  require((lower.array() <= upper.array()).all(),
          "disturbance bounds: lower must not exceed upper");
}

DisturbanceVec sample_disturbance(const DisturbanceBounds& bounds, Rng& rng) {
  bounds.validate();
  DisturbanceVec w(bounds.dim());
  for (int i = 0; i < w.size(); ++i) {
    w(i) = uniform(rng, bounds.lower(i), bounds.upper(i));
  }
  return w;
}

std::vector<DisturbanceVec> disturbance_sequence(const DisturbanceBounds& bounds,
                                                 DisturbanceMode mode,
                                                 int steps, Rng& rng) {
  require(steps >= 0, "disturbance_sequence: negative length");
  std::vector<DisturbanceVec> seq;
  seq.reserve(steps);
  if (mode == DisturbanceMode::ConstantPerTrajectory) {
    const DisturbanceVec w = sample_disturbance(bounds, rng);
    seq.assign(steps, w);
    return seq;
  }
  for (int k = 0; k < steps; ++k) seq.push_back(sample_disturbance(bounds, rng));
  return seq;
}

}  // namespace satmpc
