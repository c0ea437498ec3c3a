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

// Full-size benchmark run checked against the published figures. Prints one
// PASS/FAIL line per criterion and exits non-zero if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "satmpc/pipeline.hpp"
#include "satmpc/reports.hpp"

namespace fs = std::filesystem;
using namespace satmpc;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << fmt::format("criterion {}: {} {}", id, ok ? "PASS" : "FAIL", detail) << std::endl;
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

double percent(std::size_t part, std::size_t whole) {
  return 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

StateVec draw_state(Rng& rng, const OcpSpec& spec) {
  StateVec x(spec.state_dim());
  for (int i = 0; i < spec.state_dim(); ++i) x(i) = uniform(rng, spec.x_lower(i), spec.x_upper(i));
  return x;
}

// Each check returns an empty string on success, else what went wrong.
std::string kkt_sweep(const Problem& p, const SolverConfig& cfg) {
  Rng rng(1001);
  int optimal = 0;
  for (int i = 0; i < 100; ++i) {
    const StateVec x0 = draw_state(rng, p.spec);
    const auto s = solve(p.spec, p.model, x0, cfg);
    if (s.status != SolveStatus::Optimal) continue;
    ++optimal;
    const auto ev = evaluate_shooting(p.spec, p.model, x0, s.U);
    const double stat = (ev.gradient + ev.jacobian.transpose() * s.multipliers).cwiseAbs().maxCoeff();
    const double comp = s.multipliers.cwiseProduct(ev.g).cwiseAbs().maxCoeff();
    if (stat > 1e-8 || comp > 1e-8 || s.multipliers.minCoeff() < 0.0 || ev.g.maxCoeff() > 1e-8) {
      return fmt::format("kkt {:.3g}/{:.3g} at sample {}", stat, comp, i);
    }
  }
  return optimal > 0 ? "" : "no optimal solve in the sweep";
}

std::string gradient_check(const Problem& p) {
  Rng rng(1002);
  const int nu = p.spec.num_decisions();
  for (int i = 0; i < 100; ++i) {
    const StateVec x0 = draw_state(rng, p.spec);
    DecisionVector U(nu);
    for (int j = 0; j < nu; ++j) U(j) = uniform(rng, p.spec.u_lower(0), p.spec.u_upper(0));
    const auto ev = evaluate_shooting(p.spec, p.model, x0, U);
    for (int j = 0; j < nu; ++j) {
      DecisionVector up = U, dn = U;
      up(j) += 1e-6;
      dn(j) -= 1e-6;
      const double fd = (total_cost(p.spec, p.model, x0, up) - total_cost(p.spec, p.model, x0, dn)) / 2e-6;
      if (std::abs(ev.gradient(j) - fd) > 1e-5 * std::max(1.0, std::abs(fd))) {
        return fmt::format("gradient mismatch at sample {} input {}", i, j);
      }
    }
  }
  return "";
}

std::string oracle_dominance(const Problem& p, const SolverConfig& cfg) {
  Rng rng(1003);
  int done = 0;
  while (done < 25) {
    const StateVec x0 = draw_state(rng, p.spec);
    const auto s = solve(p.spec, p.model, x0, cfg);
    if (s.status != SolveStatus::Optimal) continue;
    ++done;
    const auto o = grid_search_oracle(p.spec, p.model, x0, 5, 6, s.U);
    if (o.feasible && s.V > o.cost + 1e-9) {
      return fmt::format("V {:.9g} above oracle {:.9g}", s.V, o.cost);
    }
  }
  return "";
}

std::string mode_and_skip_checks(const Problem& p, const SampleSet& samples, const SolverConfig& cfg,
                                 int max_steps) {
  const ControllerMode classic{ControllerVariant::Classic, ReuseScope::FirstStepOnly};
  const ControllerMode reuse{ControllerVariant::ReuseSaturated, ReuseScope::FirstStepOnly};
  std::size_t limit = std::min<std::size_t>(samples.feasible.size(), 200);
  int equivalent = 0, windows = 0;
  for (std::size_t i = 0; i < limit; ++i) {
    const auto& s = samples.feasible[i];
    const auto c = run_closed_loop(p.model, p.spec, cfg, s.x0, classic, {}, max_steps);
    const auto h = run_closed_loop(p.model, p.spec, cfg, s.x0, reuse, {}, max_steps);
    bool opened = false;
    for (int k = 0; k < h.steps(); ++k) {
      if (!h.solves[k] || h.solves[k]->window_length == 0) continue;
      opened = true;
      const int L = h.solves[k]->window_length;
      if (k + L >= h.steps()) continue;  // terminal set entered inside the window
      ++windows;
      for (int j = 1; j <= L; ++j) {
        if (h.nlp_solved[k + j]) return fmt::format("sample {}: solve inside window", s.index);
      }
      if (k + L + 1 < h.steps() && !h.nlp_solved[k + L + 1]) {
        return fmt::format("sample {}: window overran", s.index);
      }
    }
    if (opened) continue;
    ++equivalent;
    if (c.states != h.states || c.inputs != h.inputs || c.nlp_solved != h.nlp_solved) {
      return fmt::format("sample {}: modes differ without a window", s.index);
    }
  }
  if (equivalent == 0 || windows == 0) return "mode checks found nothing to compare";
  return "";
}

std::string replay_fairness(const Problem& p, const SampleSet& samples, const ExperimentConfig& cfg) {
  ExperimentConfig local = cfg;
  local.disturbance_bounds = default_disturbance_bounds(p.spec.state_dim());
  const ControllerMode modes[] = {{ControllerVariant::Classic, cfg.reuse_scope},
                                  {ControllerVariant::ReuseSaturated, cfg.reuse_scope}};
  int checked = 0;
  for (const auto& s : samples.feasible) {
    if (s.cls == SampleClass::Other) continue;
    const auto w = sample_disturbances(local, s.index);
    const auto again = sample_disturbances(local, s.index);
    if (w != again) return fmt::format("sample {}: disturbance draw not reproducible", s.index);
    for (const auto& mode : modes) {
      const auto r = run_closed_loop(p.model, p.spec, cfg.solver, s.x0, mode, w, cfg.max_steps);
      for (int k = 0; k < r.steps(); ++k) {
        const StateVec d = r.states[k + 1] - p.model.step(r.states[k], r.inputs[k]) - w[k];
        if (d.cwiseAbs().maxCoeff() > 1e-14) return fmt::format("sample {}: step {} replay", s.index, k);
      }
    }
    if (++checked == 50) break;
  }
  return checked > 0 ? "" : "no saturated samples";
}

std::string seed_determinism(const Problem& p) {
  ExperimentConfig cfg;
  cfg.n_samples = 40;
  cfg.seed = 99;
  cfg.grid_resolution = 17;
  const fs::path a = fs::temp_directory_path() / "satmpc_acceptance_a";
  const fs::path b = fs::temp_directory_path() / "satmpc_acceptance_b";
  fs::remove_all(a);
  fs::remove_all(b);
  cfg.jobs = 1;
  emit_reports(run_pipeline(p, cfg), p, cfg, a);
  cfg.jobs = 0;
  emit_reports(run_pipeline(p, cfg), p, cfg, b);
  std::string err;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    if (slurp(entry.path()) != slurp(b / name)) {
      err = name.string() + " differs between reruns";
      break;
    }
  }
  fs::remove_all(a);
  fs::remove_all(b);
  return err;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-size acceptance run for the benchmark problem"};
  std::string out_dir;
  int jobs = 0;
  app.add_option("--out", out_dir, "Also write the report files here");
  app.add_option("--jobs", jobs, "Worker threads, 0 for all cores")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const Problem problem = benchmark_problem();
  ExperimentConfig cfg;  // 5000 samples, seed 1
  cfg.jobs = jobs;

  const auto t0 = std::chrono::steady_clock::now();
  const PipelineOutput out = run_pipeline(problem, cfg, Vector(), [](const std::string& line) {
    std::cout << "# " << line << std::endl;
  });
  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  if (!out_dir.empty()) emit_reports(out, problem, cfg, out_dir);

  // 1. class shares of the feasible samples.
  {
    std::size_t lo = 0, up = 0, other = 0;
    for (const auto& s : out.samples.feasible) {
      lo += s.cls == SampleClass::Lower;
      up += s.cls == SampleClass::Upper;
      other += s.cls == SampleClass::Other;
    }
    const std::size_t n = out.samples.feasible.size();
    const double pl = percent(lo, n), pu = percent(up, n), po = percent(other, n);
    const bool ok = n == 5000 && within(pl, 12.5, 3) && within(pu, 28.18, 3) &&
                    within(po, 59.32, 3) && minutes < 10.0;
    report(1, ok, fmt::format("lower {:.2f}% upper {:.2f}% other {:.2f}% of {} samples "
                              "(targets 12.5/28.18/59.32 +-3), pipeline {:.1f} min (< 10)",
                              pl, pu, po, n, minutes));
  }

  // 2, 3. nominal saturated groups.
  {
    const auto& s = out.nominal.lower;
    report(2, within(s.nlp_saving_pct, 17.033, 5) && within(s.cost_delta_pct, 2.3873, 1.5),
           fmt::format("lower saving {:.3f}% (17.033 +-5), cost {:+.4f}% (2.3873 +-1.5), n={}",
                       s.nlp_saving_pct, s.cost_delta_pct, s.n_samples));
  }
  {
    const auto& s = out.nominal.upper;
    report(3, within(s.nlp_saving_pct, 29.275, 5) && within(s.cost_delta_pct, 0.295, 1),
           fmt::format("upper saving {:.3f}% (29.275 +-5), cost {:+.4f}% (0.295 +-1), n={}",
                       s.nlp_saving_pct, s.cost_delta_pct, s.n_samples));
  }

  // 4. whole-set saving.
  {
    const double w = weighted_whole_set_saving(out.nominal, out.samples.feasible);
    report(4, within(w, 10.38, 4),
           fmt::format("whole-set saving {:.3f}% (10.38 +-4); pooled {:.3f}%", w,
                       out.nominal.all.nlp_saving_pct));
  }

  // 5. disturbed saturated groups.
  {
    const auto& lo = out.disturbed.lower;
    const auto& up = out.disturbed.upper;
    const int excluded = lo.n_excluded_infeasible + up.n_excluded_infeasible;
    const double excl_pct = percent(static_cast<std::size_t>(excluded), out.disturbed.runs.size());
    const bool ok = within(lo.nlp_saving_pct, 16.634, 5) && within(lo.cost_delta_pct, 2.3895, 1.5) &&
                    within(up.nlp_saving_pct, 29.131, 5) && within(up.cost_delta_pct, 0.2929, 1) &&
                    excl_pct < 2.0;
    report(5, ok,
           fmt::format("lower saving {:.3f}% (16.634 +-5) cost {:+.4f}% (2.3895 +-1.5); "
                       "upper saving {:.3f}% (29.131 +-5) cost {:+.4f}% (0.2929 +-1); "
                       "excluded {}/{} = {:.2f}% (< 2)",
                       lo.nlp_saving_pct, lo.cost_delta_pct, up.nlp_saving_pct, up.cost_delta_pct,
                       excluded, out.disturbed.runs.size(), excl_pct));
  }

  // 6. a lower-saturated run that skips at least three solves.
  {
    bool ok = false;
    std::string detail = "no lower-saturated sample skips three solves";
    if (out.skip_example && out.skip_runs) {
      const auto& h = out.skip_runs->first;
      const auto& c = out.skip_runs->second;
      int skips = 0;
      while (skips + 1 < h.steps() && !h.nlp_solved[skips + 1]) ++skips;
      ok = out.skip_example->cls == SampleClass::Lower && h.steps() > 0 && h.nlp_solved[0] &&
           skips >= 3 && h.status == RunStatus::ReachedTerminal &&
           c.status == RunStatus::ReachedTerminal && h.k_hat <= c.k_hat + 1;
      detail = fmt::format("sample {} at ({:.4f}, {:.4f}): {} skips after the first solve, "
                           "k_hat {} vs classic {}",
                           out.skip_example->sample, out.skip_example->x0(0),
                           out.skip_example->x0(1), skips, h.k_hat, c.k_hat);
    }
    report(6, ok, detail);
  }

  // 7. property suite.
  {
    std::vector<std::pair<std::string, std::string>> checks;
    checks.emplace_back("kkt", kkt_sweep(problem, cfg.solver));
    checks.emplace_back("gradient", gradient_check(problem));
    checks.emplace_back("oracle", oracle_dominance(problem, cfg.solver));
    checks.emplace_back("modes", mode_and_skip_checks(problem, out.samples, cfg.solver, cfg.max_steps));
    checks.emplace_back("replay", replay_fairness(problem, out.samples, cfg));
    checks.emplace_back("determinism", seed_determinism(problem));
    bool ok = true;
    std::string detail;
    for (const auto& [name, err] : checks) {
      ok = ok && err.empty();
      if (!detail.empty()) detail += ' ';
      detail += fmt::format("{}={}", name, err.empty() ? "ok" : err);
    }
    report(7, ok, detail);
  }

  // 8. nominal descent along Classic runs.
  {
    const auto& d = out.nominal.descent;
    report(8, d.holding_fraction() >= 0.99,
           fmt::format("descent holds on {:.4f}% of {} steps ({} violations, tol {:g}; >= 99%)",
                       100.0 * d.holding_fraction(), d.steps, d.violations.size(), d.tolerance));
  }

  std::cout << (failures == 0 ? "all criteria passed" : fmt::format("{} criteria failed", failures))
            << std::endl;
  return failures == 0 ? 0 : 1;
}
