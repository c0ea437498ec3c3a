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

#include "satmpc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace satmpc {

int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(resolve_jobs(jobs)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

const char* to_string(SampleClass cls) {
  switch (cls) {
    case SampleClass::Lower: return "lower";
    case SampleClass::Upper: return "upper";
    case SampleClass::Other: return "other";
    case SampleClass::InfeasibleCandidate: return "infeasible";
  }
  return "unknown";
}

std::optional<SampleClass> sample_class_from_string(const std::string& name) {
  for (SampleClass c : {SampleClass::Lower, SampleClass::Upper, SampleClass::Other,
                        SampleClass::InfeasibleCandidate}) {
    if (name == to_string(c)) return c;
  }
  return std::nullopt;
}

const char* to_string(StatsGroup group) {
  switch (group) {
    case StatsGroup::Lower: return "lower";
    case StatsGroup::Upper: return "upper";
    case StatsGroup::All: return "all";
  }
  return "unknown";
}

const char* to_string(GridClass cls) {
  switch (cls) {
    case GridClass::Infeasible: return "infeasible";
    case GridClass::Lower: return "lower";
    case GridClass::Upper: return "upper";
    case GridClass::Other: return "other";
    case GridClass::Terminal: return "terminal";
  }
  return "unknown";
}

std::optional<GridClass> grid_class_from_string(const std::string& name) {
  for (GridClass c : {GridClass::Infeasible, GridClass::Lower, GridClass::Upper,
                      GridClass::Other, GridClass::Terminal}) {
    if (name == to_string(c)) return c;
  }
  return std::nullopt;
}

DisturbanceBounds default_disturbance_bounds(int state_dim) {
  return {Vector::Constant(state_dim, -0.01), Vector::Constant(state_dim, 0.01)};
}

void ExperimentConfig::validate() const {
  require(n_samples >= 1, "experiment: n_samples must be at least 1");
  require(max_steps >= 1, "experiment: max_steps must be at least 1");
  require(grid_resolution >= 16, "experiment: grid resolution must be at least 16");
  require(jobs >= 0, "experiment: jobs must be non-negative");
  if (disturbance_bounds.dim() > 0) disturbance_bounds.validate();
  solver.validate();
}

SampleClass classify(const NlpSolution& sol) {
  require(sol.status == SolveStatus::Optimal, "classify: solution is not optimal");
  if (sol.active.lower_active(0, 0)) return SampleClass::Lower;
  if (sol.active.upper_active(0, 0)) return SampleClass::Upper;
  return SampleClass::Other;
}

SampleSet sample_feasible(const OcpSpec& spec, const DynamicsModel& model,
                          const SolverConfig& cfg, int n, std::uint64_t seed,
                          int jobs) {
  require(n >= 1, "sample_feasible: n must be at least 1");
  cfg.validate();
  const int dim = spec.state_dim();
  const long long window = std::max<long long>(10LL * n, 1000);
  constexpr std::size_t kChunk = 512;

  SampleSet out;
  Rng rng(seed);
  std::vector<char> history;  // feasibility flag per candidate, in order
  long long window_hits = 0;

  while (static_cast<int>(out.feasible.size()) < n) {
    std::vector<ClassifiedSample> chunk(kChunk);
    for (std::size_t c = 0; c < kChunk; ++c) {
      StateVec x(dim);
      for (int i = 0; i < dim; ++i) x(i) = uniform(rng, spec.x_lower(i), spec.x_upper(i));
      chunk[c].index = out.drawn + static_cast<long long>(c);
      chunk[c].x0 = std::move(x);
    }
    SolverConfig cold = cfg;
    cold.init_policy = InitPolicy::Zeros;
    parallel_for(kChunk, jobs, [&](std::size_t c) {
      NlpSolution sol = solve(spec, model, chunk[c].x0, cold);
      if (sol.status == SolveStatus::Optimal) {
        chunk[c].cls = classify(sol);
        chunk[c].solution = std::move(sol);
      }
    });

    for (auto& cand : chunk) {
      const bool ok = cand.solution.has_value();
      history.push_back(ok ? 1 : 0);
      window_hits += ok ? 1 : 0;
      if (static_cast<long long>(history.size()) > window) {
        window_hits -= history[history.size() - 1 - static_cast<std::size_t>(window)];
      }
      ++out.drawn;
      if (ok) {
        out.feasible.push_back(std::move(cand));
        if (static_cast<int>(out.feasible.size()) == n) break;
      } else {
        out.rejected.push_back(std::move(cand));
      }
      if (static_cast<long long>(history.size()) >= window &&
          static_cast<double>(window_hits) < 0.01 * static_cast<double>(window)) {
        throw std::runtime_error(fmt::format(
            "sampling stalled: {} feasible among the last {} candidates "
            "({} feasible of {} drawn so far)",
            window_hits, window, out.feasible.size(), out.drawn));
      }
    }
  }
  return out;
}

RunSummary summarize(const ClosedLoopResult& result, const OcpSpec& spec) {
  RunSummary s;
  s.status = result.status;
  s.k_hat = result.k_hat;
  s.nlp_count = result.nlp_count();
  s.cost = cost_performance(result, spec).value_or(std::numeric_limits<double>::quiet_NaN());
  if (!result.nlp_solved.empty() && result.nlp_solved[0]) {
    for (std::size_t k = 1; k < result.nlp_solved.size() && !result.nlp_solved[k]; ++k) {
      ++s.leading_skips;
    }
  }
  return s;
}

namespace {

bool in_group(SampleClass cls, StatsGroup group) {
  switch (group) {
    case StatsGroup::Lower: return cls == SampleClass::Lower;
    case StatsGroup::Upper: return cls == SampleClass::Upper;
    case StatsGroup::All: return cls != SampleClass::InfeasibleCandidate;
  }
  return false;
}

std::vector<const ClassifiedSample*> feasible_only(
    const std::vector<ClassifiedSample>& samples, bool saturated_only) {
  std::vector<const ClassifiedSample*> out;
  for (const auto& s : samples) {
    if (s.cls == SampleClass::InfeasibleCandidate) continue;
    if (saturated_only && s.cls == SampleClass::Other) continue;
    out.push_back(&s);
  }
  return out;
}

struct SampleWork {
  PairedRun run;
  long long descent_steps = 0;
  std::vector<DescentViolation> violations;
};

// V_N(x(k+1)) <= V_N(x(k)) - l(x(k), u(k)) + tol along one Classic run. The
// value at the final state needs one more solve, since the loop stops there.
void check_descent(const ClosedLoopResult& run, const OcpSpec& spec,
                   const DynamicsModel& model, const SolverConfig& cfg,
                   long long sample, double tol, SampleWork& out) {
  const int steps = run.steps();
  if (steps == 0) return;
  std::optional<double> final_value;
  if (run.states.size() > static_cast<std::size_t>(steps) &&
      in_state_box(spec, run.states.back())) {
    SolverConfig cold = cfg;
    cold.init_policy = InitPolicy::Zeros;
    const NlpSolution sol = solve(spec, model, run.states.back(), cold);
    if (sol.status == SolveStatus::Optimal) final_value = sol.V;
  }
  for (int k = 0; k < steps; ++k) {
    const auto& rec = run.solves[static_cast<std::size_t>(k)];
    if (!rec) continue;
    std::optional<double> next;
    if (k + 1 < steps) {
      const auto& r1 = run.solves[static_cast<std::size_t>(k) + 1];
      if (r1) next = r1->value;
    } else {
      next = final_value;
    }
    if (!next) continue;
    const double stage = stage_cost(spec, run.states[static_cast<std::size_t>(k)],
                                    run.inputs[static_cast<std::size_t>(k)]);
    ++out.descent_steps;
    if (*next > rec->value - stage + tol) {
      out.violations.push_back({sample, k, rec->value, *next, stage,
                                rec->kkt_residual, rec->iterations});
    }
  }
}

BatchResult collect(std::vector<SampleWork>& work, bool with_descent) {
  BatchResult res;
  res.runs.reserve(work.size());
  for (auto& w : work) {
    res.runs.push_back(std::move(w.run));
    if (with_descent) {
      res.descent.steps += w.descent_steps;
      for (auto& v : w.violations) res.descent.violations.push_back(v);
    }
  }
  res.lower = aggregate(res.runs, StatsGroup::Lower);
  res.upper = aggregate(res.runs, StatsGroup::Upper);
  res.all = aggregate(res.runs, StatsGroup::All);
  return res;
}

}  // namespace

BatchStats aggregate(const std::vector<PairedRun>& runs, StatsGroup group) {
  BatchStats st;
  st.group = group;
  double cost_c = 0.0, cost_h = 0.0, nlp_c = 0.0, nlp_h = 0.0;
  for (const auto& r : runs) {
    if (!in_group(r.cls, group)) continue;
    if (r.excluded) {
      ++st.n_excluded_infeasible;
      continue;
    }
    ++st.n_samples;
    cost_c += r.classic.cost;
    cost_h += r.heuristic.cost;
    nlp_c += r.classic.nlp_count;
    nlp_h += r.heuristic.nlp_count;
  }
  if (st.n_samples == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    st.mean_cost_classic = st.mean_cost_heuristic = st.cost_delta_pct = nan;
    st.mean_nlp_classic = st.mean_nlp_heuristic = st.nlp_saving_pct = nan;
    return st;
  }
  const double count = st.n_samples;
  st.mean_cost_classic = cost_c / count;
  st.mean_cost_heuristic = cost_h / count;
  st.mean_nlp_classic = nlp_c / count;
  st.mean_nlp_heuristic = nlp_h / count;
  st.cost_delta_pct =
      100.0 * (st.mean_cost_heuristic - st.mean_cost_classic) / st.mean_cost_classic;
  st.nlp_saving_pct =
      100.0 * (st.mean_nlp_classic - st.mean_nlp_heuristic) / st.mean_nlp_classic;
  return st;
}

double DescentReport::holding_fraction() const {
  if (steps == 0) return 1.0;
  return 1.0 - static_cast<double>(violations.size()) / static_cast<double>(steps);
}

BatchResult run_batch(const std::vector<ClassifiedSample>& samples,
                      const OcpSpec& spec, const DynamicsModel& model,
                      const ExperimentConfig& cfg) {
  cfg.validate();
  const auto chosen = feasible_only(samples, false);
  const ControllerMode classic{ControllerVariant::Classic, cfg.reuse_scope};
  const ControllerMode reuse{ControllerVariant::ReuseSaturated, cfg.reuse_scope};
  constexpr double kDescentTol = 1e-6;

  std::vector<SampleWork> work(chosen.size());
  parallel_for(chosen.size(), cfg.jobs, [&](std::size_t i) {
    const ClassifiedSample& s = *chosen[i];
    const auto c = run_closed_loop(model, spec, cfg.solver, s.x0, classic, {}, cfg.max_steps);
    const auto h = run_closed_loop(model, spec, cfg.solver, s.x0, reuse, {}, cfg.max_steps);
    SampleWork& w = work[i];
    w.run = {s.index, s.cls, s.x0, summarize(c, spec), summarize(h, spec), false};
    w.run.excluded = !w.run.classic.reached() || !w.run.heuristic.reached();
    check_descent(c, spec, model, cfg.solver, s.index, kDescentTol, w);
  });
  BatchResult res = collect(work, true);
  res.descent.tolerance = kDescentTol;
  return res;
}

std::vector<DisturbanceVec> sample_disturbances(const ExperimentConfig& cfg,
                                                long long sample) {
  require(cfg.disturbance_bounds.dim() > 0, "sample_disturbances: bounds are not set");
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(sample)));
  return disturbance_sequence(cfg.disturbance_bounds, cfg.disturbance_mode,
                              cfg.max_steps, rng);
}

BatchResult run_disturbed_batch(const std::vector<ClassifiedSample>& samples,
                                const OcpSpec& spec, const DynamicsModel& model,
                                const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentConfig local = cfg;
  if (local.disturbance_bounds.dim() == 0) {
    local.disturbance_bounds = default_disturbance_bounds(spec.state_dim());
  }
  require(local.disturbance_bounds.dim() == spec.state_dim(),
          "run_disturbed_batch: disturbance bounds have the wrong dimension");
  const auto chosen = feasible_only(samples, true);
  const ControllerMode classic{ControllerVariant::Classic, cfg.reuse_scope};
  const ControllerMode reuse{ControllerVariant::ReuseSaturated, cfg.reuse_scope};

  std::vector<SampleWork> work(chosen.size());
  parallel_for(chosen.size(), cfg.jobs, [&](std::size_t i) {
    const ClassifiedSample& s = *chosen[i];
    const auto w_seq = sample_disturbances(local, s.index);
    const auto c = run_closed_loop(model, spec, cfg.solver, s.x0, classic, w_seq, cfg.max_steps);
    const auto h = run_closed_loop(model, spec, cfg.solver, s.x0, reuse, w_seq, cfg.max_steps);
    PairedRun& r = work[i].run;
    r = {s.index, s.cls, s.x0, summarize(c, spec), summarize(h, spec), false};
    r.excluded = !r.classic.reached() || !r.heuristic.reached();
  });
  return collect(work, false);
}

double weighted_whole_set_saving(const BatchResult& nominal,
                                 const std::vector<ClassifiedSample>& samples) {
  long long total = 0, lower = 0, upper = 0;
  for (const auto& s : samples) {
    if (s.cls == SampleClass::InfeasibleCandidate) continue;
    ++total;
    lower += s.cls == SampleClass::Lower ? 1 : 0;
    upper += s.cls == SampleClass::Upper ? 1 : 0;
  }
  require(total > 0, "weighted_whole_set_saving: no feasible samples");
  double saving = 0.0;
  if (lower > 0) saving += static_cast<double>(lower) / total * nominal.lower.nlp_saving_pct;
  if (upper > 0) saving += static_cast<double>(upper) / total * nominal.upper.nlp_saving_pct;
  return saving;
}

FeasibilityGrid approximate_feasible_boundary(const OcpSpec& spec,
                                              const DynamicsModel& model,
                                              const SolverConfig& cfg,
                                              int resolution, int jobs) {
  require(resolution >= 16, "approximate_feasible_boundary: resolution must be at least 16");
  require(spec.state_dim() == 2, "approximate_feasible_boundary: needs a two-state problem");
  FeasibilityGrid grid;
  grid.resolution = resolution;
  const auto r = static_cast<std::size_t>(resolution);
  grid.points.resize(r * r);
  grid.classes.assign(r * r, GridClass::Infeasible);
  auto coord = [&](int axis, std::size_t i) {
    const double t = static_cast<double>(i) / static_cast<double>(r - 1);
    return spec.x_lower(axis) + t * (spec.x_upper(axis) - spec.x_lower(axis));
  };
  for (std::size_t iy = 0; iy < r; ++iy) {
    for (std::size_t ix = 0; ix < r; ++ix) {
      StateVec x(2);
      x << coord(0, ix), coord(1, iy);
      grid.points[iy * r + ix] = x;
    }
  }
  SolverConfig cold = cfg;
  cold.init_policy = InitPolicy::Zeros;
  parallel_for(grid.points.size(), jobs, [&](std::size_t i) {
    const StateVec& x = grid.points[i];
    if (in_terminal_set(spec, x)) {
      grid.classes[i] = GridClass::Terminal;
      return;
    }
    const NlpSolution sol = solve(spec, model, x, cold);
    if (sol.status != SolveStatus::Optimal) return;
    switch (classify(sol)) {
      case SampleClass::Lower: grid.classes[i] = GridClass::Lower; break;
      case SampleClass::Upper: grid.classes[i] = GridClass::Upper; break;
      default: grid.classes[i] = GridClass::Other; break;
    }
  });
  return grid;
}

std::optional<PairedRun> select_skip_example(const BatchResult& nominal,
                                             int min_skips) {
  const PairedRun* best = nullptr;
  for (const auto& r : nominal.runs) {
    if (r.cls != SampleClass::Lower || r.excluded) continue;
    if (r.heuristic.leading_skips < min_skips) continue;
    if (r.heuristic.k_hat > r.classic.k_hat + 1) continue;
    if (best == nullptr) {
      best = &r;
      continue;
    }
    const int lead = r.heuristic.k_hat - r.classic.k_hat;
    const int best_lead = best->heuristic.k_hat - best->classic.k_hat;
    if (r.heuristic.leading_skips > best->heuristic.leading_skips ||
        (r.heuristic.leading_skips == best->heuristic.leading_skips && lead < best_lead)) {
      best = &r;
    }
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

}  // namespace satmpc
