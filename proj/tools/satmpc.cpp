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

// satmpc: sampling, closed-loop simulation, batch comparison and plotting
// for the saturated-prefix reuse controller.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "satmpc/control.hpp"
#include "satmpc/experiments.hpp"
#include "satmpc/pipeline.hpp"
#include "satmpc/problem_io.hpp"
#include "satmpc/reports.hpp"
#include "satmpc/svg.hpp"

namespace fs = std::filesystem;
using namespace satmpc;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// Bad flag values or inconsistent options; reported with exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string problem = "benchmark";
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  int n_samples = 5000;
  std::string mode = "reuse";
  std::string reuse_scope = "first";
  bool disturbed = false;
  std::string x0;
  int jobs = 0;
  int max_steps = 200;
  int grid = 65;
  bool n_samples_from_config = false;
};

Vector parse_state(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError(fmt::format("--x0: '{}' is not a number", item));
    }
  }
  if (values.empty()) throw UsageError("--x0 needs comma-separated values, e.g. 1.0,-0.5");
  Vector x(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) x(static_cast<Eigen::Index>(i)) = values[i];
  return x;
}

ReuseScope parse_scope(const std::string& s) {
  if (s == "first") return ReuseScope::FirstStepOnly;
  if (s == "every") return ReuseScope::EveryResolve;
  throw UsageError("--reuse-scope must be 'first' or 'every'");
}

ControllerVariant parse_mode(const std::string& s) {
  if (s == "classic") return ControllerVariant::Classic;
  if (s == "reuse") return ControllerVariant::ReuseSaturated;
  throw UsageError("--mode must be 'classic' or 'reuse'");
}

Vector json_vector(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw UsageError(fmt::format("config: '{}' must be an array", what));
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

// Config file values sit between built-in defaults and explicit flags.
void apply_config_file(const std::string& path, Options& opt, ExperimentConfig& cfg,
                       const CLI::App& cmd) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot read config file '{}'", path));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(fmt::format("config file '{}': {}", path, e.what()));
  }
  auto unset = [&](const char* flag) { return cmd.count(flag) == 0; };
  try {
    if (j.contains("problem") && unset("--problem")) opt.problem = j["problem"].get<std::string>();
    if (j.contains("out") && unset("--out")) opt.out = j["out"].get<std::string>();
    if (j.contains("seed") && unset("--seed")) opt.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("n_samples") && unset("--n-samples")) {
      opt.n_samples = j["n_samples"].get<int>();
      opt.n_samples_from_config = true;
    }
    if (j.contains("mode") && unset("--mode")) opt.mode = j["mode"].get<std::string>();
    if (j.contains("reuse_scope") && unset("--reuse-scope")) {
      opt.reuse_scope = j["reuse_scope"].get<std::string>();
    }
    if (j.contains("disturbed") && unset("--disturbed")) opt.disturbed = j["disturbed"].get<bool>();
    if (j.contains("jobs") && unset("--jobs")) opt.jobs = j["jobs"].get<int>();
    if (j.contains("max_steps") && unset("--max-steps")) opt.max_steps = j["max_steps"].get<int>();
    if (j.contains("grid") && unset("--grid")) opt.grid = j["grid"].get<int>();
    if (j.contains("disturbance_bounds")) {
      const auto& b = j["disturbance_bounds"];
      cfg.disturbance_bounds = {json_vector(b.at("lower"), "disturbance_bounds.lower"),
                                json_vector(b.at("upper"), "disturbance_bounds.upper")};
    }
    if (j.contains("disturbance_mode")) {
      const auto m = j["disturbance_mode"].get<std::string>();
      if (m == "iid") {
        cfg.disturbance_mode = DisturbanceMode::IidPerStep;
      } else if (m == "constant") {
        cfg.disturbance_mode = DisturbanceMode::ConstantPerTrajectory;
      } else {
        throw UsageError("config: disturbance_mode must be 'iid' or 'constant'");
      }
    }
    if (j.contains("solver")) {
      const auto& s = j["solver"];
      cfg.solver.kkt_tol = s.value("kkt_tol", cfg.solver.kkt_tol);
      cfg.solver.feas_tol = s.value("feas_tol", cfg.solver.feas_tol);
      cfg.solver.eps_active = s.value("eps_active", cfg.solver.eps_active);
      cfg.solver.max_iter = s.value("max_iter", cfg.solver.max_iter);
      cfg.solver.restoration_stall_iters =
          s.value("restoration_stall_iters", cfg.solver.restoration_stall_iters);
      if (s.contains("trace_path")) cfg.solver.trace_path = s["trace_path"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(fmt::format("config file '{}': {}", path, e.what()));
  }
}

ExperimentConfig build_config(Options& opt, const CLI::App& cmd) {
  ExperimentConfig cfg;
  if (!opt.config.empty()) apply_config_file(opt.config, opt, cfg, cmd);
  if (opt.out.empty()) {
    const char* env = std::getenv("SATMPC_OUT");
    opt.out = (env != nullptr && *env != '\0') ? env : "satmpc_out";
  }
  cfg.n_samples = opt.n_samples;
  cfg.seed = opt.seed;
  cfg.disturbed = opt.disturbed;
  cfg.reuse_scope = parse_scope(opt.reuse_scope);
  cfg.max_steps = opt.max_steps;
  cfg.grid_resolution = opt.grid;
  cfg.jobs = opt.jobs;
  try {
    cfg.validate();
  } catch (const ContractViolation& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

Problem load(const Options& opt) {
  try {
    return load_problem(opt.problem);
  } catch (const std::exception& e) {
    throw UsageError(fmt::format("--problem '{}': {}", opt.problem, e.what()));
  }
}

void log_line(const std::string& line) { std::cerr << "satmpc: " << line << "\n"; }

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--problem", opt.problem, "problem JSON file, or 'benchmark'");
  cmd->add_option("--config", opt.config, "JSON file with option values; flags override it");
  cmd->add_option("--out", opt.out, "output directory (default: $SATMPC_OUT, else satmpc_out)");
  cmd->add_option("--seed", opt.seed, "random seed");
  cmd->add_option("--jobs", opt.jobs, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-steps", opt.max_steps, "closed-loop step limit")->check(CLI::PositiveNumber);
  cmd->add_option("--reuse-scope", opt.reuse_scope, "which solves may open a reuse window")
      ->check(CLI::IsMember({"first", "every"}));
}

int cmd_sample(Options& opt, const CLI::App& cmd) {
  ExperimentConfig cfg = build_config(opt, cmd);
  const Problem problem = load(opt);
  const SampleSet samples = sample_feasible(problem.spec, problem.model, cfg.solver,
                                            cfg.n_samples, cfg.seed, cfg.jobs);
  const fs::path dir = opt.out;
  write_text_file(dir / "samples.csv", samples_csv(samples));
  write_text_file(dir / "table1.csv", table1_csv(samples));
  if (problem.spec.state_dim() == 2) {
    write_text_file(dir / "figure1.svg", render_samples_svg(problem.spec, samples.feasible));
  }
  write_text_file(dir / "manifest.json", manifest_json(cfg, problem_fingerprint(problem)));
  std::cout << table1_csv(samples);
  log_line(fmt::format("{} feasible of {} drawn; wrote {}", samples.feasible.size(),
                       samples.drawn, dir.string()));
  return 0;
}

int cmd_simulate(Options& opt, const CLI::App& cmd) {
  ExperimentConfig cfg = build_config(opt, cmd);
  const Problem problem = load(opt);
  const Vector x0 = parse_state(opt.x0);
  if (x0.size() != problem.spec.state_dim()) {
    throw UsageError(fmt::format("--x0 has {} values, the problem has {} states", x0.size(),
                                 problem.spec.state_dim()));
  }
  const ControllerMode mode{parse_mode(opt.mode), cfg.reuse_scope};
  std::vector<DisturbanceVec> w;
  if (cfg.disturbed) {
    if (cfg.disturbance_bounds.dim() == 0) {
      cfg.disturbance_bounds = default_disturbance_bounds(problem.spec.state_dim());
    }
    Rng rng(cfg.seed);
    w = disturbance_sequence(cfg.disturbance_bounds, cfg.disturbance_mode, cfg.max_steps, rng);
  }
  const ClosedLoopResult run =
      run_closed_loop(problem.model, problem.spec, cfg.solver, x0, mode, w, cfg.max_steps);
  const fs::path file = fs::path(opt.out) / fmt::format("simulate_{}.csv", opt.mode);
  write_text_file(file, closed_loop_csv(run, problem.spec));
  const auto v = cost_performance(run, problem.spec);
  std::cout << fmt::format("status={} steps={} k_hat={} nlp_solved={} V_hat={}\n",
                           to_string(run.status), run.steps(), run.k_hat, run.nlp_count(),
                           v ? fmt::format("{:.17g}", *v) : std::string("n/a"));
  log_line("wrote " + file.string());
  return 0;
}

int cmd_batch(Options& opt, const CLI::App& cmd) {
  ExperimentConfig cfg = build_config(opt, cmd);
  if (cmd.count("--n-samples") == 0 && !opt.n_samples_from_config) {
    throw UsageError("batch needs --n-samples (or n_samples in --config)");
  }
  const Problem problem = load(opt);
  Vector x0;
  if (!opt.x0.empty()) {
    x0 = parse_state(opt.x0);
    if (x0.size() != problem.spec.state_dim()) {
      throw UsageError("--x0 does not match the problem's state dimension");
    }
  } else if (opt.problem == "benchmark") {
    x0.resize(2);
    x0 << 1.004, -0.6015;
  }
  const PipelineOutput out = run_pipeline(problem, cfg, x0, log_line);
  emit_reports(out, problem, cfg, opt.out);
  std::cout << "group,nlp_classic,nlp_heuristic,saving_percent,cost_delta_percent,samples,excluded\n";
  auto row = [](const char* name, const BatchStats& s) {
    std::cout << fmt::format("{},{:.4f},{:.4f},{:.3f},{:.4f},{},{}\n", name, s.mean_nlp_classic,
                             s.mean_nlp_heuristic, s.nlp_saving_pct, s.cost_delta_pct,
                             s.n_samples, s.n_excluded_infeasible);
  };
  row("nominal_lower", out.nominal.lower);
  row("nominal_upper", out.nominal.upper);
  row("nominal_all", out.nominal.all);
  row("disturbed_lower", out.disturbed.lower);
  row("disturbed_upper", out.disturbed.upper);
  log_line("wrote " + opt.out);
  return 0;
}

int cmd_plot(Options& opt, const CLI::App& cmd) {
  build_config(opt, cmd);
  const Problem problem = load(opt);
  if (problem.spec.state_dim() != 2) throw UsageError("plot needs a two-state problem");
  const fs::path dir = opt.out;
  int written = 0;
  if (fs::exists(dir / "samples.csv")) {
    const auto samples = read_samples_csv(dir / "samples.csv");
    write_text_file(dir / "figure1.svg", render_samples_svg(problem.spec, samples));
    ++written;
  }
  if (fs::exists(dir / "grid.csv")) {
    const FeasibilityGrid grid = read_grid_csv(dir / "grid.csv");
    std::vector<Trajectory> tr;
    if (fs::exists(dir / "trajectories.csv")) tr = read_trajectories_csv(dir / "trajectories.csv");
    write_text_file(dir / "figure3.svg", render_trajectories_svg(problem.spec, grid, tr));
    ++written;
  }
  if (written == 0) {
    throw std::runtime_error(fmt::format(
        "nothing to plot in '{}': expected samples.csv or grid.csv from 'sample' or 'batch'",
        dir.string()));
  }
  log_line(fmt::format("rendered {} figure(s) into {}", written, dir.string()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear MPC with saturated-prefix reuse: experiments and tools", "satmpc"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  Options opt;
  CLI::App* sample = app.add_subcommand("sample", "sample and classify feasible initial states");
  add_common(sample, opt);
  sample->add_option("--n-samples", opt.n_samples, "feasible samples to collect")
      ->check(CLI::PositiveNumber);

  CLI::App* simulate = app.add_subcommand("simulate", "run one closed loop from --x0");
  add_common(simulate, opt);
  simulate->add_option("--x0", opt.x0, "initial state, comma-separated")->required();
  simulate->add_option("--mode", opt.mode, "controller")->check(CLI::IsMember({"classic", "reuse"}));
  simulate->add_flag("--disturbed", opt.disturbed, "add bounded uniform disturbances");

  CLI::App* batch = app.add_subcommand("batch", "sampling, nominal and disturbed comparisons, figures");
  add_common(batch, opt);
  batch->add_option("--n-samples", opt.n_samples, "feasible samples to collect (required)")
      ->check(CLI::PositiveNumber);
  batch->add_option("--grid", opt.grid, "feasibility grid points per axis")
      ->check(CLI::Range(16, 4096));
  batch->add_option("--x0", opt.x0, "start of the plotted trajectories");
  batch->add_flag("--disturbed", opt.disturbed,
                  "accepted for symmetry; batch always runs the disturbed comparison");

  CLI::App* plot = app.add_subcommand("plot", "re-render SVG figures from CSVs in --out");
  add_common(plot, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (sample->parsed()) return cmd_sample(opt, *sample);
    if (simulate->parsed()) return cmd_simulate(opt, *simulate);
    if (batch->parsed()) return cmd_batch(opt, *batch);
    return cmd_plot(opt, *plot);
  } catch (const UsageError& e) {
    std::cerr << "satmpc: error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "satmpc: error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
