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

#include <vector>

#include <benchmark/benchmark.h>

#include "satmpc/control.hpp"
#include "satmpc/ocp.hpp"
#include "satmpc/qp.hpp"
#include "satmpc/random.hpp"
#include "satmpc/solver.hpp"

using namespace satmpc;

namespace {

std::vector<StateVec> random_states(int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<StateVec> out;
  for (int i = 0; i < count; ++i) {
    StateVec x(2);
    x << uniform(rng, -2, 2), uniform(rng, -2, 2);
    out.push_back(x);
  }
  return out;
}

void BM_Rollout(benchmark::State& state) {
  const OcpSpec spec = benchmark_ocp();
  const DynamicsModel model = benchmark_model();
  StateVec x0(2);
  x0 << 0.8, -0.4;
  const DecisionVector U = DecisionVector::Constant(spec.num_decisions(), -0.3);
  for (auto _ : state) {
    double cost = 0.0;
    Vector g;
    evaluate_values(spec, model, x0, U, cost, g);
    benchmark::DoNotOptimize(cost);
  }
}
BENCHMARK(BM_Rollout);

void BM_ShootingDerivatives(benchmark::State& state) {
  const OcpSpec spec = benchmark_ocp();
  const DynamicsModel model = benchmark_model();
  StateVec x0(2);
  x0 << 0.8, -0.4;
  const DecisionVector U = DecisionVector::Constant(spec.num_decisions(), -0.3);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_shooting(spec, model, x0, U));
}
BENCHMARK(BM_ShootingDerivatives);

void BM_LagrangianHessian(benchmark::State& state) {
  const OcpSpec spec = benchmark_ocp();
  const DynamicsModel model = benchmark_model();
  StateVec x0(2);
  x0 << 0.8, -0.4;
  const DecisionVector U = DecisionVector::Constant(spec.num_decisions(), -0.3);
  const Vector lambda = Vector::Constant(ConstraintLayout(spec).size(), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(lagrangian_hessian(spec, model, x0, U, lambda));
}
BENCHMARK(BM_LagrangianHessian);

void BM_QpBoxConstrained(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(7);
  Matrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = uniform(rng, -1, 1);
  const Matrix H = M * M.transpose() + Matrix::Identity(n, n);
  Vector g(n);
  for (int i = 0; i < n; ++i) g(i) = uniform(rng, -5, 5);
  Matrix C(2 * n, n);
  C << Matrix::Identity(n, n), -Matrix::Identity(n, n);
  const Vector d = Vector::Constant(2 * n, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(solve_qp(H, g, C, d));
}
BENCHMARK(BM_QpBoxConstrained)->Arg(12)->Arg(24)->Arg(48);

// Mix of feasible and infeasible candidates, as drawn by the sampler.
void BM_SolveRandomState(benchmark::State& state) {
  const OcpSpec spec = benchmark_ocp();
  const DynamicsModel model = benchmark_model();
  const auto xs = random_states(64, 3);
  SolverConfig cfg;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(spec, model, xs[i++ % xs.size()], cfg));
  }
}
BENCHMARK(BM_SolveRandomState)->Unit(benchmark::kMicrosecond);

void BM_ClosedLoop(benchmark::State& state) {
  const OcpSpec spec = benchmark_ocp();
  const DynamicsModel model = benchmark_model();
  StateVec x0(2);
  x0 << 1.004, -0.6015;
  const ControllerMode mode{state.range(0) == 0 ? ControllerVariant::Classic
                                                 : ControllerVariant::ReuseSaturated,
                            ReuseScope::FirstStepOnly};
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_closed_loop(model, spec, SolverConfig{}, x0, mode));
  }
}
BENCHMARK(BM_ClosedLoop)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
