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

#ifndef SATMPC_EXPERIMENTS_HPP
#define SATMPC_EXPERIMENTS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "satmpc/control.hpp"
#include "satmpc/model.hpp"
#include "satmpc/ocp.hpp"
#include "satmpc/solver.hpp"

namespace satmpc {

/// Runs fn(0..count-1) on up to `jobs` threads (0 = hardware concurrency).
/// fn must only write to per-index storage. The first exception thrown by
/// any call is rethrown after all workers stop.
void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& fn);

/// Effective worker count for a --jobs value.
int resolve_jobs(int jobs);

enum class SampleClass { Lower, Upper, Other, InfeasibleCandidate };

const char* to_string(SampleClass cls);
std::optional<SampleClass> sample_class_from_string(const std::string& name);

struct ClassifiedSample {
  long long index = 0;  ///< position in the candidate stream
  StateVec x0;
  SampleClass cls = SampleClass::InfeasibleCandidate;
  std::optional<NlpSolution> solution;  ///< set for feasible samples
};

struct ExperimentConfig {
  int n_samples = 5000;
  std::uint64_t seed = 1;
  bool disturbed = false;
  DisturbanceBounds disturbance_bounds;  ///< defaults to [-0.01, 0.01]^n
  DisturbanceMode disturbance_mode = DisturbanceMode::IidPerStep;
  ReuseScope reuse_scope = ReuseScope::FirstStepOnly;
  int max_steps = 200;
  int grid_resolution = 65;
  int jobs = 0;
  SolverConfig solver;

  void validate() const;
};

/// Default disturbance box of half-width 0.01 in every state.
DisturbanceBounds default_disturbance_bounds(int state_dim);

/// Feasible samples in draw order, plus the rejected candidates drawn
/// before the last acceptance.
struct SampleSet {
  std::vector<ClassifiedSample> feasible;
  std::vector<ClassifiedSample> rejected;
  long long drawn = 0;
};

/// Class of u(0) in an Optimal solution: Lower, Upper or Other.
SampleClass classify(const NlpSolution& sol);

/**
 * Rejection sampling of uniform draws over the state box, kept when
 * check_feasible holds, until n feasible samples exist. Candidates come from
 * one RNG stream seeded with `seed` and are evaluated in parallel chunks, so
 * the result does not depend on `jobs`.
 *
 * Throws std::runtime_error if fewer than 1% of the draws in any window of
 * max(10 n, 1000) consecutive candidates are feasible.
 */
SampleSet sample_feasible(const OcpSpec& spec, const DynamicsModel& model,
                          const SolverConfig& cfg, int n, std::uint64_t seed,
                          int jobs = 0);

/// Closed-loop summary of one run, as stored in runs.csv.
struct RunSummary {
  RunStatus status = RunStatus::MaxSteps;
  int k_hat = -1;
  int nlp_count = 0;
  double cost = 0.0;  ///< cost performance; NaN unless ReachedTerminal
  int leading_skips = 0;  ///< unsolved steps right after the solve at k = 0

  bool reached() const { return status == RunStatus::ReachedTerminal; }
};

RunSummary summarize(const ClosedLoopResult& result, const OcpSpec& spec);

struct PairedRun {
  long long sample = 0;
  SampleClass cls = SampleClass::Other;
  StateVec x0;
  RunSummary classic;
  RunSummary heuristic;
  bool excluded = false;  ///< either mode failed to reach the terminal set
};

enum class StatsGroup { Lower, Upper, All };

const char* to_string(StatsGroup group);

struct BatchStats {
  StatsGroup group = StatsGroup::All;
  int n_samples = 0;  ///< included pairs
  int n_excluded_infeasible = 0;
  double mean_cost_classic = 0.0;
  double mean_cost_heuristic = 0.0;
  double cost_delta_pct = 0.0;
  double mean_nlp_classic = 0.0;
  double mean_nlp_heuristic = 0.0;
  double nlp_saving_pct = 0.0;
};

/// Aggregates the non-excluded runs of one group.
BatchStats aggregate(const std::vector<PairedRun>& runs, StatsGroup group);

/// One step where V_N(x+) > V_N(x) - l(x, u) + tolerance.
struct DescentViolation {
  long long sample = 0;
  int step = 0;
  double value = 0.0;       ///< V_N(x(k))
  double next_value = 0.0;  ///< V_N(x(k+1))
  double stage = 0.0;       ///< l(x(k), u(k))
  double kkt_residual = 0.0;
  int iterations = 0;
};

struct DescentReport {
  long long steps = 0;
  std::vector<DescentViolation> violations;
  double tolerance = 1e-6;

  double holding_fraction() const;
};

struct BatchResult {
  std::vector<PairedRun> runs;
  BatchStats lower;
  BatchStats upper;
  BatchStats all;
  DescentReport descent;  ///< nominal batches only
};

/// Classic and reuse runs for every feasible sample, nominal dynamics.
/// Also checks the descent property along the Classic runs.
BatchResult run_batch(const std::vector<ClassifiedSample>& samples,
                      const OcpSpec& spec, const DynamicsModel& model,
                      const ExperimentConfig& cfg);

/// Per-sample disturbance sequence, derived from (seed, sample index).
std::vector<DisturbanceVec> sample_disturbances(const ExperimentConfig& cfg,
                                                long long sample);

/// Classic and reuse runs for the saturated samples under additive
/// disturbances; both modes replay the same sequence per sample. Runs that
/// fail in either mode are excluded from both averages.
BatchResult run_disturbed_batch(const std::vector<ClassifiedSample>& samples,
                                const OcpSpec& spec, const DynamicsModel& model,
                                const ExperimentConfig& cfg);

/// Class-fraction-weighted NLP saving over the whole feasible set:
/// sum over saturated groups of (group share of samples) * (group saving).
double weighted_whole_set_saving(const BatchResult& nominal,
                                 const std::vector<ClassifiedSample>& samples);

enum class GridClass { Infeasible, Lower, Upper, Other, Terminal };

const char* to_string(GridClass cls);
std::optional<GridClass> grid_class_from_string(const std::string& name);

struct FeasibilityGrid {
  int resolution = 0;
  std::vector<StateVec> points;  ///< row-major, x1 fastest
  std::vector<GridClass> classes;
};

/// Classifies `resolution` evenly spaced points per axis (box vertices
/// included) for a two-state problem.
FeasibilityGrid approximate_feasible_boundary(const OcpSpec& spec,
                                              const DynamicsModel& model,
                                              const SolverConfig& cfg,
                                              int resolution, int jobs = 0);

/// A lower-saturated sample whose reuse run solves at step 0, then skips at
/// least `min_skips` NLPs, and reaches the terminal set at most one step
/// after Classic. Prefers the longest skip, then the earliest arrival.
std::optional<PairedRun> select_skip_example(const BatchResult& nominal,
                                             int min_skips = 3);

}  // namespace satmpc

#endif  // SATMPC_EXPERIMENTS_HPP
