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

#include "satmpc/pipeline.hpp"

#include <fmt/format.h>

#include "satmpc/reports.hpp"
#include "satmpc/svg.hpp"

namespace satmpc {

PipelineOutput run_pipeline(const Problem& problem, const ExperimentConfig& cfg,
                            const Vector& trajectory_x0, const LogFn& log) {
  cfg.validate();
  const OcpSpec& spec = problem.spec;
  const DynamicsModel& model = problem.model;
  auto say = [&](const std::string& line) {
    if (log) log(line);
  };

  PipelineOutput out;
  out.samples = sample_feasible(spec, model, cfg.solver, cfg.n_samples, cfg.seed, cfg.jobs);
  say(fmt::format("sampled {} feasible states from {} candidates",
                  out.samples.feasible.size(), out.samples.drawn));

  out.nominal = run_batch(out.samples.feasible, spec, model, cfg);
  say(fmt::format("nominal batch: {} paired runs, {} descent violations in {} steps",
                  out.nominal.runs.size(), out.nominal.descent.violations.size(),
                  out.nominal.descent.steps));

  out.disturbed = run_disturbed_batch(out.samples.feasible, spec, model, cfg);
  say(fmt::format("disturbed batch: {} paired runs, {} excluded", out.disturbed.runs.size(),
                  out.disturbed.lower.n_excluded_infeasible +
                      out.disturbed.upper.n_excluded_infeasible));

  const ControllerMode classic{ControllerVariant::Classic, cfg.reuse_scope};
  const ControllerMode reuse{ControllerVariant::ReuseSaturated, cfg.reuse_scope};
  out.skip_example = select_skip_example(out.nominal);
  if (out.skip_example) {
    const StateVec& x0 = out.skip_example->x0;
    out.skip_runs.emplace(run_closed_loop(model, spec, cfg.solver, x0, reuse, {}, cfg.max_steps),
                          run_closed_loop(model, spec, cfg.solver, x0, classic, {}, cfg.max_steps));
  }

  if (spec.state_dim() == 2) {
    out.grid = approximate_feasible_boundary(spec, model, cfg.solver, cfg.grid_resolution,
                                             cfg.jobs);
    say(fmt::format("classified a {0}x{0} grid", cfg.grid_resolution));
  }

  Vector x0 = trajectory_x0;
  if (x0.size() == 0 && out.skip_example) x0 = out.skip_example->x0;
  if (x0.size() > 0) {
    require(x0.size() == spec.state_dim(), "trajectory start has the wrong dimension");
    out.trajectories.emplace_back(
        "classic", run_closed_loop(model, spec, cfg.solver, x0, classic, {}, cfg.max_steps));
    out.trajectories.emplace_back(
        "reuse", run_closed_loop(model, spec, cfg.solver, x0, reuse, {}, cfg.max_steps));
  }
  return out;
}

std::string problem_fingerprint(const Problem& problem) {
  return problem.model.name() + ":" + ocp_to_json(problem.spec);
}

void emit_reports(const PipelineOutput& out, const Problem& problem,
                  const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const OcpSpec& spec = problem.spec;
  write_text_file(dir / "table1.csv", table1_csv(out.samples));
  write_text_file(dir / "table2.csv", stats_csv(out.nominal.lower));
  write_text_file(dir / "table3.csv", stats_csv(out.nominal.upper));
  write_text_file(dir / "table4.csv", stats_csv(out.disturbed.lower));
  write_text_file(dir / "table5.csv", stats_csv(out.disturbed.upper));
  write_text_file(dir / "whole_set.csv", whole_set_csv(out.nominal, out.samples));
  write_text_file(dir / "runs.csv", runs_csv(out.nominal.runs));
  write_text_file(dir / "runs_disturbed.csv", runs_csv(out.disturbed.runs));
  write_text_file(dir / "samples.csv", samples_csv(out.samples));
  write_text_file(dir / "descent_violations.csv", descent_csv(out.nominal.descent));
  write_text_file(dir / "trajectories.csv", trajectories_csv(out.trajectories, spec));
  if (out.skip_runs) {
    write_text_file(dir / "figure2.csv", closed_loop_csv(out.skip_runs->first, spec));
    write_text_file(dir / "figure2_classic.csv", closed_loop_csv(out.skip_runs->second, spec));
  }
  if (spec.state_dim() == 2) {
    write_text_file(dir / "grid.csv", grid_csv(out.grid));
    write_text_file(dir / "figure1.svg", render_samples_svg(spec, out.samples.feasible));
    std::vector<Trajectory> tr;
    for (const auto& [label, run] : out.trajectories) tr.push_back(to_trajectory(label, run));
    write_text_file(dir / "figure3.svg", render_trajectories_svg(spec, out.grid, tr));
  }
  write_text_file(dir / "manifest.json", manifest_json(cfg, problem_fingerprint(problem)));
}

}  // namespace satmpc
