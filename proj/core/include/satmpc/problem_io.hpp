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

#ifndef SATMPC_PROBLEM_IO_HPP
#define SATMPC_PROBLEM_IO_HPP

#include <filesystem>
#include <string>

#include "satmpc/model.hpp"
#include "satmpc/ocp.hpp"

namespace satmpc {

// JSON problem documents look like
//
//   {
//     "N": 12,
//     "Q": [[0.05, 0], [0, 0.05]],
//     "R": 0.1,                       // number or nested array
//     "P": [[5.9353, 5.2774], [5.2774, 5.9353]],
//     "alpha": 0.0606,
//     "x_bounds": {"lower": [-2, -2], "upper": [2, 2]},
//     "u_bounds": {"lower": [-0.5], "upper": [0.5]},
//     "model": "benchmark"            // optional; or a polynomial table
//   }
//
// A polynomial model is {"state_dim": n, "input_dim": m, "rows": [[{"coeff":
// c, "x": [...], "u": [...]}, ...], ...]}.

/// Parses an OcpSpec from a JSON document and validates it.
OcpSpec ocp_from_json(const std::string& text);
std::string ocp_to_json(const OcpSpec& spec);

PolynomialTable polynomial_table_from_json(const std::string& text);

struct Problem {
  OcpSpec spec;
  DynamicsModel model;
};

/// The benchmark problem.
Problem benchmark_problem();

/// Loads a problem document; "benchmark" selects the built-in instance.
/// Throws std::runtime_error with the path on I/O or parse failure.
Problem load_problem(const std::string& path_or_name);

}  // namespace satmpc

#endif  // SATMPC_PROBLEM_IO_HPP
