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

#ifndef SATMPC_SVG_HPP
#define SATMPC_SVG_HPP

#include <string>
#include <vector>

#include "satmpc/experiments.hpp"
#include "satmpc/ocp.hpp"
#include "satmpc/reports.hpp"

namespace satmpc {

/// Feasible samples over the state box: red where u(0) sits at its upper
/// bound, blue at its lower bound, black otherwise, with the terminal
/// ellipse. Two-state problems only.
std::string render_samples_svg(const OcpSpec& spec,
                               const std::vector<ClassifiedSample>& samples);

/// Feasibility grid as shaded cells with closed-loop trajectories on top.
/// Solved steps are filled markers, reused steps hollow.
std::string render_trajectories_svg(const OcpSpec& spec, const FeasibilityGrid& grid,
                                    const std::vector<Trajectory>& trajectories);

/// Boundary of {x : x'Px = alpha} as a closed polyline of `points` vertices.
std::vector<StateVec> terminal_ellipse(const OcpSpec& spec, int points = 181);

}  // namespace satmpc

#endif  // SATMPC_SVG_HPP
