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

#ifndef SATMPC_PIPELINE_HPP
#define SATMPC_PIPELINE_HPP

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "satmpc/experiments.hpp"
#include "satmpc/problem_io.hpp"

namespace satmpc {

using LogFn = std::function<void(const std::string&)>;

struct PipelineOutput {
  SampleSet samples;
  BatchResult nominal;
  BatchResult disturbed;
  FeasibilityGrid grid;
  std::optional<PairedRun> skip_example;
  /// Reuse and Classic runs of the skip example, when one exists.
  std::optional<std::pair<ClosedLoopResult, ClosedLoopResult>> skip_runs;
  /// Labelled runs drawn over the grid.
  std::vector<std::pair<std::string, ClosedLoopResult>> trajectories;
};

/**
 * Sampling, nominal and disturbed batches, feasibility grid and the example
 * trajectories. `trajectory_x0`, when empty, defaults to the skip example's
 * initial state. `log` receives one line per stage.
 */
PipelineOutput run_pipeline(const Problem& problem, const ExperimentConfig& cfg,
                            const Vector& trajectory_x0 = Vector(),
                            const LogFn& log = nullptr);

/// Fingerprint of the problem for the manifest: model name plus the
/// canonical JSON of the OcpSpec.
std::string problem_fingerprint(const Problem& problem);

/// Writes table1..table5.csv, whole_set.csv, runs.csv, runs_disturbed.csv,
/// samples.csv, grid.csv, trajectories.csv, figure2.csv,
/// figure2_classic.csv, descent_violations.csv, figure1.svg, figure3.svg and
/// manifest.json into `dir`.
void emit_reports(const PipelineOutput& out, const Problem& problem,
                  const ExperimentConfig& cfg, const std::filesystem::path& dir);

}  // namespace satmpc

#endif  // SATMPC_PIPELINE_HPP
