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

#ifndef SATMPC_QP_HPP
#define SATMPC_QP_HPP

#include <vector>

#include "satmpc/types.hpp"

namespace satmpc {

enum class QpStatus {
  Solved,
  Infeasible,
  IterationLimit,
  NotPositiveDefinite,
};

const char* to_string(QpStatus status);

struct QpResult {
  QpStatus status = QpStatus::IterationLimit;
  Vector x;
  /// One multiplier per row of C; zero for inactive rows.
  Vector lambda;
  std::vector<int> active;
  int iterations = 0;
};

struct QpOptions {
  /// Relative feasibility tolerance on each row.
  double feas_tol = 1e-12;
  int max_iter = 0;  ///< 0 selects 10 * (rows + variables)
};

/**
 * Dense strictly convex QP
 *
 *   min 0.5 x'Hx + g'x   s.t.  C x <= d
 *
 * solved with the Goldfarb-Idnani dual active-set method. H must be positive
 * definite. The method starts from the unconstrained minimizer and adds the
 * most violated constraint at each major iteration, so it needs no feasible
 * starting point and reports Infeasible when a violated row cannot be
 * satisfied without breaking the others.
 *
 * The active-set factors are updated with Givens rotations as rows enter and
 * leave. Dense storage; meant for the small problems of single-shooting MPC
 * (tens of variables, up to a few hundred rows).
 */
QpResult solve_qp(const Matrix& H, const Vector& g, const Matrix& C,
                  const Vector& d, const QpOptions& options = {});

}  // namespace satmpc

#endif  // SATMPC_QP_HPP
