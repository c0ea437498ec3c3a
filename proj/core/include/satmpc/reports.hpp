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

#ifndef SATMPC_REPORTS_HPP
#define SATMPC_REPORTS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "satmpc/control.hpp"
#include "satmpc/experiments.hpp"

// CSV and JSON outputs of the experiment pipeline. Floats are written with
// 17 significant digits; every writer throws std::runtime_error naming the
// path when the file cannot be written, and every reader when it cannot be
// read or parsed.

namespace satmpc {

/// Library version string.
const char* version();

/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// class,count,percent over the feasible samples.
std::string table1_csv(const SampleSet& samples);

/// metric,classic,heuristic,percent for one group.
std::string stats_csv(const BatchStats& stats);

/// metric,value: weighted and pooled whole-set savings and class shares.
std::string whole_set_csv(const BatchResult& nominal, const SampleSet& samples);

std::string runs_csv(const std::vector<PairedRun>& runs);
std::vector<PairedRun> read_runs_csv(const std::filesystem::path& path);

/// index,x1..xn,class over feasible and rejected candidates, in draw order.
std::string samples_csv(const SampleSet& samples);
std::vector<ClassifiedSample> read_samples_csv(const std::filesystem::path& path);

/// ix,iy,x1,x2,class.
std::string grid_csv(const FeasibilityGrid& grid);
FeasibilityGrid read_grid_csv(const std::filesystem::path& path);

std::string closed_loop_csv(const ClosedLoopResult& result, const OcpSpec& spec);

/// A labelled closed-loop trajectory, as plotted.
struct Trajectory {
  std::string label;
  std::vector<StateVec> states;
  std::vector<bool> nlp_solved;  ///< one per applied input
};

Trajectory to_trajectory(std::string label, const ClosedLoopResult& result);

/// label followed by the closed-loop columns, several trajectories stacked.
std::string trajectories_csv(const std::vector<std::pair<std::string, ClosedLoopResult>>& runs,
                             const OcpSpec& spec);
std::vector<Trajectory> read_trajectories_csv(const std::filesystem::path& path);

/// sample,step,value,next_value,stage,kkt_residual,iterations.
std::string descent_csv(const DescentReport& report);

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a(const std::string& text);

/// Canonical text of the configuration that determines every output.
std::string canonical_config(const ExperimentConfig& cfg, const std::string& problem);

/// seed, config hash, tool version and the canonical configuration.
std::string manifest_json(const ExperimentConfig& cfg, const std::string& problem);

}  // namespace satmpc

#endif  // SATMPC_REPORTS_HPP
