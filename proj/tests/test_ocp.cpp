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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "oracle.hpp"
#include "satmpc/ocp.hpp"
#include "satmpc/problem_io.hpp"

namespace satmpc {
namespace {

StateVec vec2(double a, double b) {
  StateVec x(2);
  x << a, b;
  return x;
}

DecisionVector random_inputs(Rng& rng, int n) {
  DecisionVector U(n);
  for (int i = 0; i < n; ++i) U(i) = uniform(rng, -0.5, 0.5);
  return U;
}

std::vector<double> as_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

TEST(Ocp, BenchmarkData) {
  const auto spec = benchmark_ocp();
  EXPECT_NO_THROW(spec.validate());
  EXPECT_EQ(spec.horizon, 12);
  EXPECT_DOUBLE_EQ(spec.alpha, 0.0606);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(spec.P);
  EXPECT_NEAR(es.eigenvalues()(0), 0.6579, 1e-12);
  EXPECT_NEAR(es.eigenvalues()(1), 11.2127, 1e-12);
  EXPECT_EQ(ConstraintLayout(spec).size(), 73);
}

TEST(Ocp, ValidateRejectsBrokenSpecs) {
  auto bad = benchmark_ocp();
  bad.alpha = 0.0;
  EXPECT_THROW(bad.validate(), ContractViolation);
  bad = benchmark_ocp();
  bad.P(0, 1) = -bad.P(0, 1) - 1.0;  // asymmetric
  EXPECT_THROW(bad.validate(), ContractViolation);
  bad = benchmark_ocp();
  bad.u_lower(0) = 0.1;
  EXPECT_THROW(bad.validate(), ContractViolation);
  bad = benchmark_ocp();
  bad.alpha = 100.0;  // ellipse leaves the box
  EXPECT_THROW(bad.validate(), ContractViolation);
  bad = benchmark_ocp();
  bad.horizon = 0;
  EXPECT_THROW(bad.validate(), ContractViolation);
}

TEST(Ocp, CostHandValues) {
  const auto spec = benchmark_ocp();
  InputVec u(1);
  u << 0.5;
  EXPECT_NEAR(stage_cost(spec, vec2(1, 1), u), 0.125, 1e-15);
  u << 0.0;
  EXPECT_NEAR(stage_cost(spec, vec2(2, 0), u), 0.2, 1e-15);
  EXPECT_EQ(stage_cost(spec, vec2(0, 0), u), 0.0);
  EXPECT_EQ(terminal_cost(spec, vec2(0, 0)), 0.0);
  EXPECT_NEAR(terminal_cost(spec, vec2(0.1, 0)), 0.059353, 1e-15);
  EXPECT_NEAR(terminal_cost(spec, vec2(0.1, -0.1)), 0.013158, 1e-15);
}

TEST(Ocp, TerminalSetMembership) {
  const auto spec = benchmark_ocp();
  EXPECT_TRUE(in_terminal_set(spec, vec2(0, 0)));
  EXPECT_TRUE(in_terminal_set(spec, vec2(0.101, 0)));
  EXPECT_FALSE(in_terminal_set(spec, vec2(0.102, 0)));
  EXPECT_TRUE(in_state_box(spec, vec2(2, -2)));
  EXPECT_FALSE(in_state_box(spec, vec2(2.0001, 0)));
}

TEST(Ocp, RolloutHandValues) {
  const auto spec = benchmark_ocp();
  const auto model = benchmark_model();
  DecisionVector U = DecisionVector::Zero(spec.horizon);
  const auto zero = rollout(model, vec2(0, 0), U);
  ASSERT_EQ(zero.states.size(), 13u);
  for (const auto& x : zero.states) EXPECT_EQ(x, StateVec::Zero(2));
  U(0) = 0.5;
  const auto r = rollout(model, vec2(0, 0), U);
  EXPECT_NEAR(r.states[1](0), 0.025, 1e-15);
  EXPECT_NEAR(r.states[1](1), 0.025, 1e-15);
  EXPECT_NEAR(r.states[2](0), 0.0275, 1e-15);
  EXPECT_NEAR(r.states[2](1), 0.0275, 1e-15);
  for (int k = 0; k < spec.horizon; ++k) {
    EXPECT_EQ(r.states[k + 1], model.step(r.states[k], U.segment(k, 1)));
  }
}

TEST(Ocp, ConstraintsAtOriginAndBounds) {
  const auto spec = benchmark_ocp();
  const auto model = benchmark_model();
  const ConstraintLayout layout(spec);
  DecisionVector U = DecisionVector::Zero(spec.horizon);
  const Vector g0 = constraints(spec, model, vec2(0, 0), U);
  ASSERT_EQ(g0.size(), layout.size());
  EXPECT_LT(g0.maxCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(g0(layout.terminal_ellipse()), -0.0606);

  U(0) = -0.5;
  EXPECT_EQ(constraints(spec, model, vec2(0, 0), U)(layout.input_lower(0, 0)), 0.0);

  const DecisionVector push = DecisionVector::Constant(spec.horizon, 0.5);
  EXPECT_GT(constraints(spec, model, vec2(2, 2), push).maxCoeff(), 0.0);
}

TEST(Ocp, MatchesStraightLineReference) {
  const auto spec = benchmark_ocp();
  const auto model = benchmark_model();
  Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    const StateVec x0 = vec2(uniform(rng, -2, 2), uniform(rng, -2, 2));
    const DecisionVector U = random_inputs(rng, spec.horizon);
    const oracle::X ox{x0(0), x0(1)};
    const double ref = oracle::cost(ox, as_std(U));
    EXPECT_NEAR(total_cost(spec, model, x0, U), ref, 1e-12 * std::max(1.0, std::abs(ref)));
    const auto gref = oracle::constraints(ox, as_std(U));
    const Vector g = constraints(spec, model, x0, U);
    ASSERT_EQ(static_cast<std::size_t>(g.size()), gref.size());
    for (std::size_t r = 0; r < gref.size(); ++r) {
      EXPECT_NEAR(g(static_cast<Eigen::Index>(r)), gref[r], 1e-12) << "row " << r;
    }
    const auto ev = evaluate_shooting(spec, model, x0, U);
    EXPECT_NEAR(ev.cost, ref, 1e-12 * std::max(1.0, std::abs(ref)));
    EXPECT_LE((ev.g - g).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Ocp, GradientMatchesFiniteDifferences) {
  const auto spec = benchmark_ocp();
  const auto model = benchmark_model();
  Rng rng(22);
  for (int i = 0; i < 100; ++i) {
    const StateVec x0 = vec2(uniform(rng, -2, 2), uniform(rng, -2, 2));
    const DecisionVector U = random_inputs(rng, spec.horizon);
    const auto ev = evaluate_shooting(spec, model, x0, U);
    for (int j = 0; j < spec.horizon; ++j) {
      const double h = 1e-6;
      DecisionVector up = U, dn = U;
      up(j) += h;
      dn(j) -= h;
      const double fd = (oracle::cost({x0(0), x0(1)}, as_std(up)) -
                         oracle::cost({x0(0), x0(1)}, as_std(dn))) / (2 * h);
      EXPECT_LE(std::abs(ev.gradient(j) - fd), 1e-5 * std::max(1.0, std::abs(fd)))
          << "sample " << i << " input " << j;
    }
  }
}

TEST(Ocp, ConstraintJacobianMatchesFiniteDifferences) {
  const auto spec = benchmark_ocp();
  const auto model = benchmark_model();
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    const StateVec x0 = vec2(uniform(rng, -2, 2), uniform(rng, -2, 2));
    const DecisionVector U = random_inputs(rng, spec.horizon);
    const auto ev = evaluate_shooting(spec, model, x0, U);
    for (int j = 0; j < spec.horizon; ++j) {
      const double h = 1e-6;
      DecisionVector up = U, dn = U;
      up(j) += h;
      dn(j) -= h;
      const auto gu = oracle::constraints({x0(0), x0(1)}, as_std(up));
      const auto gd = oracle::constraints({x0(0), x0(1)}, as_std(dn));
      for (std::size_t r = 0; r < gu.size(); ++r) {
        const double fd = (gu[r] - gd[r]) / (2 * h);
        EXPECT_LE(std::abs(ev.jacobian(static_cast<Eigen::Index>(r), j) - fd),
                  1e-6 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST(Ocp, LagrangianHessianMatchesFiniteDifferences) {
  const auto spec = benchmark_ocp();
  const auto model = benchmark_model();
  const int rows = ConstraintLayout(spec).size();
  Rng rng(24);
  for (int i = 0; i < 30; ++i) {
    const StateVec x0 = vec2(uniform(rng, -2, 2), uniform(rng, -2, 2));
    const DecisionVector U = random_inputs(rng, spec.horizon);
    Vector lambda(rows);
    for (int r = 0; r < rows; ++r) lambda(r) = uniform(rng, 0, 2);
    const Matrix H = lagrangian_hessian(spec, model, x0, U, lambda);
    EXPECT_LE((H - H.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    for (int j = 0; j < spec.horizon; ++j) {
      const double h = 1e-6;
      DecisionVector up = U, dn = U;
      up(j) += h;
      dn(j) -= h;
      const Vector col = (lagrangian_gradient(spec, model, x0, up, lambda) -
                          lagrangian_gradient(spec, model, x0, dn, lambda)) / (2 * h);
      EXPECT_LE((H.col(j) - col).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, col.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(Ocp, JsonRoundTrip) {
  const auto spec = benchmark_ocp();
  const auto back = ocp_from_json(ocp_to_json(spec));
  EXPECT_EQ(back.horizon, spec.horizon);
  EXPECT_EQ(back.P, spec.P);
  EXPECT_EQ(back.Q, spec.Q);
  EXPECT_EQ(back.alpha, spec.alpha);
  EXPECT_EQ(back.u_upper, spec.u_upper);
  EXPECT_EQ(ocp_to_json(back), ocp_to_json(spec));
  EXPECT_THROW(ocp_from_json("{\"horizon\": 3}"), std::exception);
}

}  // namespace
}  // namespace satmpc
