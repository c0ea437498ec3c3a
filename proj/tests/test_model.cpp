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

#include <cmath>

#include "oracle.hpp"
#include "satmpc/model.hpp"

namespace satmpc {
namespace {

StateVec vec2(double a, double b) {
  StateVec x(2);
  x << a, b;
  return x;
}

InputVec vec1(double u) { return InputVec::Constant(1, u); }

void expect_near(const StateVec& got, double a, double b, double tol = 1e-15) {
  ASSERT_EQ(got.size(), 2);
  EXPECT_NEAR(got(0), a, tol);
  EXPECT_NEAR(got(1), b, tol);
}

TEST(Model, StepHandValues) {
  const auto m = benchmark_model();
  expect_near(m.step(vec2(0, 0), vec1(0)), 0, 0);
  expect_near(m.step(vec2(0, 0), vec1(0.5)), 0.025, 0.025);
  expect_near(m.step(vec2(0, 0), vec1(-0.5)), -0.025, -0.025);
  expect_near(m.step(vec2(1, -1), vec1(0)), 0.9, -0.9);
  expect_near(m.step(vec2(2, 2), vec1(0)), 2.2, 2.2);
}

TEST(Model, StepDisturbedHandValues) {
  const auto m = benchmark_model();
  expect_near(m.step_disturbed(vec2(0, 0), vec1(0), vec2(0.01, -0.01)), 0.01, -0.01);
  expect_near(m.step_disturbed(vec2(0, 0), vec1(0.5), vec2(0, 0)), 0.025, 0.025);
  expect_near(m.step_disturbed(vec2(1, -1), vec1(0), vec2(0.01, 0.01)), 0.91, -0.89);
}

TEST(Model, RejectsBadArguments) {
  const auto m = benchmark_model();
  EXPECT_THROW(m.step(StateVec::Zero(3), vec1(0)), ContractViolation);
  EXPECT_THROW(m.step(vec2(0, 0), InputVec::Zero(2)), ContractViolation);
  EXPECT_THROW(m.step(vec2(NAN, 0), vec1(0)), ContractViolation);
  EXPECT_THROW(m.step_disturbed(vec2(0, 0), vec1(0), StateVec::Zero(1)), ContractViolation);
}

TEST(Model, MatchesReferenceAndZeroDisturbance) {
  const auto m = benchmark_model();
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const StateVec x = vec2(uniform(rng, -2, 2), uniform(rng, -2, 2));
    const double u = uniform(rng, -0.5, 0.5);
    const auto ref = oracle::step({x(0), x(1)}, u);
    const StateVec got = m.step(x, vec1(u));
    EXPECT_NEAR(got(0), ref[0], 1e-15);
    EXPECT_NEAR(got(1), ref[1], 1e-15);
    EXPECT_EQ(m.step_disturbed(x, vec1(u), StateVec::Zero(2)), got);
    EXPECT_EQ(m.step(x, vec1(u)), got);
  }
}

TEST(Model, JacobiansMatchFiniteDifferences) {
  const auto m = benchmark_model();
  ASSERT_TRUE(m.has_analytic_jacobians());
  Rng rng(5);
  Matrix A, B, Afd, Bfd;
  for (int i = 0; i < 100; ++i) {
    const StateVec x = vec2(uniform(rng, -2, 2), uniform(rng, -2, 2));
    const InputVec u = vec1(uniform(rng, -0.5, 0.5));
    m.jacobians(x, u, A, B);
    m.finite_difference_jacobians(x, u, Afd, Bfd);
    EXPECT_LE((A - Afd).cwiseAbs().maxCoeff(), 1e-6 * (1.0 + A.cwiseAbs().maxCoeff()));
    EXPECT_LE((B - Bfd).cwiseAbs().maxCoeff(), 1e-6 * (1.0 + B.cwiseAbs().maxCoeff()));
  }
}

TEST(Model, CurvatureMatchesFiniteDifferenceOfJacobians) {
  const auto m = benchmark_model();
  // Same dynamics without the curvature hook, so weighted_hessian falls back
  // to differencing the analytic Jacobians.
  const DynamicsModel plain(
      2, 1, [&](const StateVec& x, const InputVec& u) { return m.step(x, u); },
      [&](const StateVec& x, const InputVec& u, Matrix& A, Matrix& B) { m.jacobians(x, u, A, B); });
  Rng rng(8);
  Matrix Hxx, Hxu, Huu, Gxx, Gxu, Guu;
  for (int i = 0; i < 50; ++i) {
    const StateVec x = vec2(uniform(rng, -2, 2), uniform(rng, -2, 2));
    const InputVec u = vec1(uniform(rng, -0.5, 0.5));
    const Vector w = vec2(uniform(rng, -3, 3), uniform(rng, -3, 3));
    m.weighted_hessian(x, u, w, Hxx, Hxu, Huu);
    plain.weighted_hessian(x, u, w, Gxx, Gxu, Guu);
    EXPECT_LE((Hxx - Gxx).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((Hxu - Gxu).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((Huu - Guu).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Model, PolynomialTableReproducesBenchmark) {
  const auto a = benchmark_model();
  const auto b = polynomial_model(benchmark_polynomial_table());
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const StateVec x = vec2(uniform(rng, -2, 2), uniform(rng, -2, 2));
    const InputVec u = vec1(uniform(rng, -0.5, 0.5));
    EXPECT_LE((a.step(x, u) - b.step(x, u)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Model, DisturbanceSampling) {
  DisturbanceBounds zero{StateVec::Zero(2), StateVec::Zero(2)};
  Rng rng(1);
  EXPECT_EQ(sample_disturbance(zero, rng), StateVec::Zero(2));

  DisturbanceBounds box{StateVec::Constant(2, -0.01), StateVec::Constant(2, 0.01)};
  for (int i = 0; i < 1000; ++i) {
    const auto w = sample_disturbance(box, rng);
    EXPECT_TRUE((w.array() >= -0.01).all() && (w.array() <= 0.01).all());
  }
  Rng r1(42), r2(42);
  EXPECT_EQ(sample_disturbance(box, r1), sample_disturbance(box, r2));

  DisturbanceBounds bad{StateVec::Constant(2, 0.01), StateVec::Constant(2, -0.01)};
  EXPECT_THROW(bad.validate(), ContractViolation);
}

TEST(Model, DisturbanceSequenceModes) {
  DisturbanceBounds box{StateVec::Constant(2, -0.01), StateVec::Constant(2, 0.01)};
  Rng rng(9);
  const auto held = disturbance_sequence(box, DisturbanceMode::ConstantPerTrajectory, 20, rng);
  ASSERT_EQ(held.size(), 20u);
  for (const auto& w : held) EXPECT_EQ(w, held.front());
  const auto iid = disturbance_sequence(box, DisturbanceMode::IidPerStep, 20, rng);
  ASSERT_EQ(iid.size(), 20u);
  EXPECT_NE(iid[0], iid[1]);
}

TEST(Random, DeriveSeedSeparatesStreams) {
  EXPECT_EQ(derive_seed(1, 7), derive_seed(1, 7));
  EXPECT_NE(derive_seed(1, 7), derive_seed(1, 8));
  EXPECT_NE(derive_seed(1, 7), derive_seed(2, 7));
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double v = uniform01(rng);
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

}  // namespace
}  // namespace satmpc
