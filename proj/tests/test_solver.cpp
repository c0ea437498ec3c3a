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
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "oracle.hpp"
#include "satmpc/solver.hpp"

namespace satmpc {
namespace {

StateVec vec2(double a, double b) {
  StateVec x(2);
  x << a, b;
  return x;
}

struct Bench {
  OcpSpec spec = benchmark_ocp();
  DynamicsModel model = benchmark_model();
  SolverConfig cfg;
};

// Feasible states drawn uniformly from the box.
std::vector<std::pair<StateVec, NlpSolution>> feasible_states(const Bench& b, int count,
                                                              std::uint64_t seed) {
  std::vector<std::pair<StateVec, NlpSolution>> out;
  Rng rng(seed);
  while (static_cast<int>(out.size()) < count) {
    const StateVec x = vec2(uniform(rng, -2, 2), uniform(rng, -2, 2));
    auto sol = solve(b.spec, b.model, x, b.cfg);
    if (sol.status == SolveStatus::Optimal) out.emplace_back(x, std::move(sol));
  }
  return out;
}

TEST(Solver, ConfigValidation) {
  SolverConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.kkt_tol = 0;
  EXPECT_THROW(cfg.validate(), ContractViolation);
  cfg = {};
  cfg.eps_active = 1e-10;  // below feas_tol
  EXPECT_THROW(cfg.validate(), ContractViolation);
  cfg = {};
  cfg.max_iter = 0;
  EXPECT_THROW(cfg.validate(), ContractViolation);
}

TEST(Solver, OriginIsTrivial) {
  Bench b;
  const auto s = solve(b.spec, b.model, vec2(0, 0), b.cfg);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_LE(s.U.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(s.V, 1e-20);
  EXPECT_TRUE(s.active.empty());
}

TEST(Solver, InsideTerminalSetHasNoActiveInputBound) {
  Bench b;
  const StateVec x0 = vec2(0.05, 0.02);
  ASSERT_TRUE(in_terminal_set(b.spec, x0));
  const auto s = solve(b.spec, b.model, x0, b.cfg);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  for (int k = 0; k < b.spec.horizon; ++k) {
    EXPECT_FALSE(s.active.lower_active(k));
    EXPECT_FALSE(s.active.upper_active(k));
  }
  const auto o = grid_search_oracle(b.spec, b.model, x0, 5, 6, s.U);
  ASSERT_TRUE(o.feasible);
  EXPECT_LT(std::abs(o.U(0)), 0.5);
}

TEST(Solver, LowerSaturatedStateAgreesWithOracle) {
  Bench b;
  const StateVec x0 = vec2(0.5206, -0.1482);
  const auto s = solve(b.spec, b.model, x0, b.cfg);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_TRUE(s.active.lower_active(0));
  EXPECT_NEAR(s.U(0), -0.5, 1e-6);
  const auto o = grid_search_oracle(b.spec, b.model, x0, 5, 6, s.U);
  ASSERT_TRUE(o.feasible);
  EXPECT_EQ(o.U(0), -0.5);
}

TEST(Solver, CheckFeasible) {
  Bench b;
  EXPECT_TRUE(check_feasible(b.spec, b.model, vec2(0, 0), b.cfg));
  EXPECT_TRUE(check_feasible(b.spec, b.model, vec2(0.1, 0.0), b.cfg));
  EXPECT_FALSE(check_feasible(b.spec, b.model, vec2(2, 2), b.cfg));
  // From (2, 2) the first state already leaves the box for every admissible
  // input: x1(1) = 2.2 + 0.15 u >= 2.125.
  for (double u = -0.5; u <= 0.5; u += 0.01) EXPECT_GT(oracle::step({2, 2}, u)[0], 2.0);
  EXPECT_FALSE(check_feasible(b.spec, b.model, vec2(2.5, 0), b.cfg));
  EXPECT_TRUE(check_feasible(b.spec, b.model, vec2(1.004, -0.6015), b.cfg));
}

TEST(Solver, KktSweep) {
  Bench b;
  Rng rng(101);
  int optimal = 0;
  for (int i = 0; i < 100; ++i) {
    const StateVec x0 = vec2(uniform(rng, -2, 2), uniform(rng, -2, 2));
    const auto s = solve(b.spec, b.model, x0, b.cfg);
    if (s.status != SolveStatus::Optimal) {
      EXPECT_EQ(s.status, SolveStatus::Infeasible) << x0.transpose();
      continue;
    }
    ++optimal;
    // Recompute the conditions from the derivatives rather than trusting
    // the solver's own residual.
    const auto ev = evaluate_shooting(b.spec, b.model, x0, s.U);
    ASSERT_EQ(s.multipliers.size(), ev.g.size());
    const Vector stat = ev.gradient + ev.jacobian.transpose() * s.multipliers;
    EXPECT_LE(stat.cwiseAbs().maxCoeff(), 1e-8) << x0.transpose();
    EXPECT_GE(s.multipliers.minCoeff(), 0.0);
    EXPECT_LE(s.multipliers.cwiseProduct(ev.g).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(ev.g.maxCoeff(), 1e-8);
    EXPECT_LE(s.kkt_residual, 1e-8);
    EXPECT_LE(s.feas_violation, 1e-8);
    EXPECT_NEAR(s.V, total_cost(b.spec, b.model, x0, s.U), 1e-12);
    for (int k = 0; k < b.spec.horizon; ++k) {
      EXPECT_FALSE(s.active.lower_active(k) && s.active.upper_active(k));
    }
    for (std::size_t r = 0; r < s.active.rows.size(); ++r) {
      if (s.active.rows[r]) {
        EXPECT_LE(std::abs(ev.g(static_cast<Eigen::Index>(r))), 1e-6);
      }
    }
  }
  EXPECT_GT(optimal, 0);
}

TEST(Solver, OracleDominance) {
  Bench b;
  for (const auto& [x0, s] : feasible_states(b, 25, 31)) {
    const auto o = grid_search_oracle(b.spec, b.model, x0, 5, 6, s.U);
    if (!o.feasible) continue;
    EXPECT_LE(s.V, o.cost + 1e-9) << x0.transpose();
  }
}

TEST(Solver, OracleAtOrigin) {
  Bench b;
  const auto o = grid_search_oracle(b.spec, b.model, vec2(0, 0), 5, 6);
  ASSERT_TRUE(o.feasible);
  EXPECT_EQ(o.cost, 0.0);
  EXPECT_EQ(o.U, DecisionVector::Zero(b.spec.horizon));
}

TEST(Solver, Deterministic) {
  Bench b;
  for (const StateVec& x0 : {vec2(1.004, -0.6015), vec2(0.5206, -0.1482), vec2(-0.3, 0.4)}) {
    const auto a = solve(b.spec, b.model, x0, b.cfg);
    const auto c = solve(b.spec, b.model, x0, b.cfg);
    ASSERT_EQ(a.status, c.status);
    ASSERT_EQ(a.U.size(), c.U.size());
    EXPECT_EQ(std::memcmp(a.U.data(), c.U.data(), sizeof(double) * a.U.size()), 0);
    EXPECT_EQ(std::memcmp(a.multipliers.data(), c.multipliers.data(),
                          sizeof(double) * a.multipliers.size()), 0);
    EXPECT_EQ(a.V, c.V);
    EXPECT_EQ(a.iterations, c.iterations);
    EXPECT_EQ(a.active.rows, c.active.rows);
  }
}

TEST(Solver, WarmStartFromShiftedOptimum) {
  Bench b;
  for (const auto& [x0, s] : feasible_states(b, 20, 77)) {
    const StateVec x1 = b.model.step(x0, s.U.segment(0, 1));
    if (in_terminal_set(b.spec, x1)) continue;
    DecisionVector warm = DecisionVector::Zero(s.U.size());
    warm.head(s.U.size() - 1) = s.U.tail(s.U.size() - 1);
    EXPECT_EQ(solve(b.spec, b.model, x1, b.cfg, warm).status, SolveStatus::Optimal)
        << x0.transpose();
  }
}

TEST(Solver, SlowProgressStatesConverge) {
  // These once stalled under a penalty parameter inflated by an early spike.
  Bench b;
  for (const StateVec& x0 : {vec2(1.0625, -1.5), vec2(1, -1.375), vec2(1.0625, -1.1875)}) {
    const auto s = solve(b.spec, b.model, x0, b.cfg);
    EXPECT_EQ(s.status, SolveStatus::Optimal) << x0.transpose();
    EXPECT_LE(s.kkt_residual, 1e-8);
  }
  EXPECT_NEAR(solve(b.spec, b.model, vec2(1.0625, -1.5), b.cfg).V, 1.038784, 5e-6);
}

TEST(Solver, StateOutsideBoxIsInfeasible) {
  Bench b;
  const auto s = solve(b.spec, b.model, vec2(0, 2.01), b.cfg);
  EXPECT_EQ(s.status, SolveStatus::Infeasible);
  EXPECT_EQ(s.iterations, 0);
}

TEST(ActiveSet, ThresholdSemantics) {
  Bench b;
  const ConstraintLayout layout(b.spec);
  DecisionVector U = DecisionVector::Zero(b.spec.horizon);
  EXPECT_TRUE(extract_active_set(b.spec, b.model, vec2(0, 0), U, 1e-6).empty());

  U(0) = -0.5;
  auto a = extract_active_set(b.spec, b.model, vec2(0, 0), U, 1e-6);
  EXPECT_TRUE(a.lower_active(0));
  EXPECT_TRUE(a.rows[static_cast<std::size_t>(layout.input_lower(0, 0))]);
  EXPECT_FALSE(a.upper_active(0));

  U(0) = -0.5 + 1e-9;
  EXPECT_TRUE(extract_active_set(b.spec, b.model, vec2(0, 0), U, 1e-6).lower_active(0));
  U(0) = -0.5 + 1e-5;
  EXPECT_FALSE(extract_active_set(b.spec, b.model, vec2(0, 0), U, 1e-6).lower_active(0));

  U(3) = 0.5;
  a = extract_active_set(b.spec, b.model, vec2(0, 0), U, 1e-6);
  EXPECT_TRUE(a.upper_active(3));
  EXPECT_EQ(a.count(), 1);
}

TEST(Solver, TraceFile) {
  Bench b;
  const auto path = std::filesystem::temp_directory_path() / "satmpc_trace_test.csv";
  std::filesystem::remove(path);
  b.cfg.trace_path = path.string();
  ASSERT_EQ(solve(b.spec, b.model, vec2(0.5, -0.3), b.cfg).status, SolveStatus::Optimal);
  std::ifstream in(path);
  std::string header, row;
  ASSERT_TRUE(std::getline(in, header));
  EXPECT_TRUE(std::getline(in, row));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace satmpc
