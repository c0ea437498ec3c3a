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

#include "satmpc/control.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace satmpc {

const char* to_string(ControllerVariant variant) {
  return variant == ControllerVariant::Classic ? "classic" : "reuse";
}

const char* to_string(ReuseScope scope) {
  return scope == ReuseScope::FirstStepOnly ? "first" : "every";
}

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::ReachedTerminal: return "reached_terminal";
    case RunStatus::MaxSteps: return "max_steps";
    case RunStatus::InfeasibleAtStep: return "infeasible";
  }
  return "unknown";
}

InputVec ReuseWindow::input(const OcpSpec& spec) const {
  InputVec u(static_cast<Eigen::Index>(sides.size()));
  for (std::size_t j = 0; j < sides.size(); ++j) {
    const auto i = static_cast<Eigen::Index>(j);
    u(i) = sides[j] == BoundSide::Lower ? spec.u_lower(i) : spec.u_upper(i);
  }
  return u;
}

std::optional<ReuseWindow> saturated_prefix(const ActiveSet& active,
                                            const OcpSpec& spec) {
  const int N = spec.horizon;
  const int m = spec.input_dim();
  require(active.horizon == N && active.input_dim == m,
          "saturated_prefix: active set does not match the problem");

  ReuseWindow window;
  window.length = N - 1;
  for (int j = 0; j < m; ++j) {
    BoundSide side;
    if (active.lower_active(0, j)) {
      side = BoundSide::Lower;
    } else if (active.upper_active(0, j)) {
      side = BoundSide::Upper;
    } else {
      return std::nullopt;
    }
    int run = 0;
    for (int k = 1; k < N; ++k) {
      const bool same = side == BoundSide::Lower ? active.lower_active(k, j)
                                                 : active.upper_active(k, j);
      if (!same) break;
      ++run;
    }
    window.sides.push_back(side);
    window.length = std::min(window.length, run);
  }
  if (window.length < 1) return std::nullopt;
  return window;
}

int ClosedLoopResult::nlp_count() const {
  return static_cast<int>(std::count(nlp_solved.begin(), nlp_solved.end(), true));
}

ClosedLoopResult run_closed_loop(const DynamicsModel& model, const OcpSpec& spec,
                                 const SolverConfig& cfg, const StateVec& x0,
                                 const ControllerMode& mode,
                                 std::span<const DisturbanceVec> disturbances,
                                 int max_steps) {
  require(max_steps >= 1, "run_closed_loop: max_steps must be at least 1");
  require(x0.size() == spec.state_dim() && x0.allFinite(),
          "run_closed_loop: x0 has the wrong size or is not finite");
  require(disturbances.empty() ||
              static_cast<int>(disturbances.size()) >= max_steps,
          "run_closed_loop: need at least max_steps disturbance vectors");
  cfg.validate();

  const int m = spec.input_dim();
  const int nu = spec.num_decisions();
  const bool reuse = mode.variant == ControllerVariant::ReuseSaturated;

  ClosedLoopResult res;
  res.states.push_back(x0);

  DecisionVector last_U;
  int last_solve_step = -1;
  int pending = 0;
  InputVec held;

  for (int k = 0;; ++k) {
    const StateVec& x = res.states.back();
    if (in_terminal_set(spec, x)) {
      res.status = RunStatus::ReachedTerminal;
      res.k_hat = k;
      break;
    }
    if (!in_state_box(spec, x)) {
      res.status = RunStatus::InfeasibleAtStep;
      res.failed_step = k;
      break;
    }
    if (k >= max_steps) {
      res.status = RunStatus::MaxSteps;
      break;
    }

    InputVec u;
    if (pending > 0) {
      u = held;
      --pending;
      res.nlp_solved.push_back(false);
      res.solves.emplace_back();
    } else {
      std::optional<DecisionVector> warm;
      if (last_solve_step >= 0) {
        const int shift = std::min(k - last_solve_step, spec.horizon);
        DecisionVector w = DecisionVector::Zero(nu);
        w.head(nu - shift * m) = last_U.tail(nu - shift * m);
        warm = std::move(w);
      }
      NlpSolution sol = solve(spec, model, x, cfg, warm);
      if (sol.status != SolveStatus::Optimal) {
        res.status = RunStatus::InfeasibleAtStep;
        res.failed_step = k;
        res.failure = sol.status;
        break;
      }
      SolveRecord rec{sol.V, sol.kkt_residual, sol.feas_violation,
                      sol.iterations, 0};
      if (reuse && (k == 0 || mode.reuse_scope == ReuseScope::EveryResolve)) {
        if (auto window = saturated_prefix(sol.active, spec)) {
          pending = window->length;
          held = window->input(spec);
          rec.window_length = window->length;
        }
      }
      u = input_at(sol.U, 0, m);
      last_U = std::move(sol.U);
      last_solve_step = k;
      res.nlp_solved.push_back(true);
      res.solves.emplace_back(rec);
    }

    // The solver may sit a hair outside the box; the plant never does.
    u = u.cwiseMax(spec.u_lower).cwiseMin(spec.u_upper);
    StateVec next = disturbances.empty()
                        ? model.step(x, u)
                        : model.step_disturbed(x, u, disturbances[static_cast<std::size_t>(k)]);
    res.inputs.push_back(std::move(u));
    res.states.push_back(std::move(next));
  }
  return res;
}

std::optional<double> cost_performance(const ClosedLoopResult& result,
                                       const OcpSpec& spec) {
  if (result.status != RunStatus::ReachedTerminal) return std::nullopt;
  double v = 0.0;
  for (std::size_t k = 0; k < result.inputs.size(); ++k) {
    v += stage_cost(spec, result.states[k], result.inputs[k]);
  }
  return v;
}

void write_closed_loop_csv(std::ostream& out, const ClosedLoopResult& result,
                           const OcpSpec& spec) {
  const int n = spec.state_dim();
  const int m = spec.input_dim();
  std::string header = "k";
  for (int i = 0; i < n; ++i) header += fmt::format(",x{}", i + 1);
  if (m == 1) {
    header += ",u";
  } else {
    for (int j = 0; j < m; ++j) header += fmt::format(",u{}", j + 1);
  }
  out << header << ",nlp_solved,in_terminal\n";

  for (std::size_t k = 0; k < result.states.size(); ++k) {
    const StateVec& x = result.states[k];
    std::string line = fmt::format("{}", k);
    for (int i = 0; i < n; ++i) line += fmt::format(",{:.17g}", x(i));
    const bool applied = k < result.inputs.size();
    for (int j = 0; j < m; ++j) {
      line += applied ? fmt::format(",{:.17g}", result.inputs[k](j)) : std::string(",");
    }
    line += applied ? (result.nlp_solved[k] ? ",1" : ",0") : ",";
    line += in_terminal_set(spec, x) ? ",1\n" : ",0\n";
    out << line;
  }
}

}  // namespace satmpc
