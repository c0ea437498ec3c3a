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

#ifndef SATMPC_CONTROL_HPP
#define SATMPC_CONTROL_HPP

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "satmpc/model.hpp"
#include "satmpc/ocp.hpp"
#include "satmpc/solver.hpp"
#include "satmpc/types.hpp"

namespace satmpc {

enum class ControllerVariant { Classic, ReuseSaturated };

enum class ReuseScope {
  /// Only the solve at k = 0 may open a reuse window.
  FirstStepOnly,
  /// Any solve may open one.
  EveryResolve,
};

struct ControllerMode {
  ControllerVariant variant = ControllerVariant::Classic;
  ReuseScope reuse_scope = ReuseScope::FirstStepOnly;  ///< ignored by Classic
};

const char* to_string(ControllerVariant variant);
const char* to_string(ReuseScope scope);

enum class BoundSide { Lower, Upper };

/// Open-loop inputs to replay after a solve: every channel held at the bound
/// it saturates at step 0, for `length` further steps.
struct ReuseWindow {
  std::vector<BoundSide> sides;  ///< one per input channel
  int length = 0;                ///< >= 1

  /// The bound values to apply during the window.
  InputVec input(const OcpSpec& spec) const;
};

/**
 * Length of the run of predicted inputs saturated at the same bound as u(0).
 *
 * Every channel must be saturated at step 0. Per channel, the window covers
 * the maximal run of steps 1, 2, ... active at that channel's side; the
 * overall length is the shortest run. No window if that length is zero.
 */
std::optional<ReuseWindow> saturated_prefix(const ActiveSet& active,
                                            const OcpSpec& spec);

enum class RunStatus { ReachedTerminal, MaxSteps, InfeasibleAtStep };

const char* to_string(RunStatus status);

/// Solver outcome at one applied step (absent for reused steps).
struct SolveRecord {
  double value = 0.0;
  double kkt_residual = 0.0;
  double feas_violation = 0.0;
  int iterations = 0;
  int window_length = 0;  ///< reuse window opened by this solve, 0 if none
};

struct ClosedLoopResult {
  std::vector<StateVec> states;           ///< x(0..k_hat)
  std::vector<InputVec> inputs;           ///< u(0..k_hat-1)
  std::vector<bool> nlp_solved;           ///< one flag per input
  std::vector<std::optional<SolveRecord>> solves;  ///< one per input
  RunStatus status = RunStatus::MaxSteps;
  int k_hat = -1;          ///< terminal-set entry step, -1 unless reached
  int failed_step = -1;    ///< step of InfeasibleAtStep
  /// Solver status at failed_step; unset when the state left the box.
  std::optional<SolveStatus> failure;

  int steps() const { return static_cast<int>(inputs.size()); }
  int nlp_count() const;
};

/**
 * Receding-horizon simulation from x0 until the terminal set is reached.
 *
 * Terminal membership is tested before every input application, including
 * inside a reuse window. The first solve starts from cfg's cold start; later
 * solves are warm-started from the most recent optimizer shifted by the
 * number of steps since it was computed, zero-padded. A solve that does not
 * return Optimal, or a state outside the box, ends the run with
 * InfeasibleAtStep.
 *
 * `disturbances`, when non-empty, must hold at least max_steps vectors;
 * entry k is added to the transition from x(k).
 */
ClosedLoopResult run_closed_loop(const DynamicsModel& model, const OcpSpec& spec,
                                 const SolverConfig& cfg, const StateVec& x0,
                                 const ControllerMode& mode,
                                 std::span<const DisturbanceVec> disturbances = {},
                                 int max_steps = 200);

/// Sum of stage costs over the applied steps; empty unless ReachedTerminal.
std::optional<double> cost_performance(const ClosedLoopResult& result,
                                       const OcpSpec& spec);

/// CSV with columns k, x1..xn, u (u1..um when m > 1), nlp_solved,
/// in_terminal. The last row holds the final state with empty input fields.
void write_closed_loop_csv(std::ostream& out, const ClosedLoopResult& result,
                           const OcpSpec& spec);

}  // namespace satmpc

#endif  // SATMPC_CONTROL_HPP
