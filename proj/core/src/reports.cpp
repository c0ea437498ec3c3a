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

#include "satmpc/reports.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "json.hpp"

#ifndef SATMPC_VERSION
#define SATMPC_VERSION "0.0.0"
#endif

namespace satmpc {

namespace fs = std::filesystem;

const char* version() { return SATMPC_VERSION; }

void write_text_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) {
    throw std::runtime_error(fmt::format("cannot create directory '{}': {}",
                                         path.parent_path().string(), ec.message()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  out << content;
  out.flush();
  if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
}

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Whole file as rows of fields; the header is checked and dropped.
std::vector<std::vector<std::string>> read_rows(const fs::path& path,
                                                std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}' for reading", path.string()));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(fmt::format("'{}' is empty", path.string()));
  }
  if (header) *header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split(line));
  }
  return rows;
}

[[noreturn]] void bad_row(const fs::path& path, std::size_t row, const std::string& what) {
  throw std::runtime_error(fmt::format("'{}' data row {}: {}", path.string(), row + 1, what));
}

double to_double(const fs::path& path, std::size_t row, const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) bad_row(path, row, "malformed number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    bad_row(path, row, "malformed number '" + s + "'");
  }
}

long long to_int(const fs::path& path, std::size_t row, const std::string& s) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) bad_row(path, row, "malformed integer '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    bad_row(path, row, "malformed integer '" + s + "'");
  }
}

int count_prefixed(const std::vector<std::string>& header, const std::string& prefix) {
  int n = 0;
  for (const auto& h : header) {
    if (h.size() > prefix.size() && h.compare(0, prefix.size(), prefix) == 0 &&
        std::isdigit(static_cast<unsigned char>(h[prefix.size()]))) {
      ++n;
    }
  }
  return n;
}

std::optional<RunStatus> run_status_from_string(const std::string& s) {
  for (RunStatus st : {RunStatus::ReachedTerminal, RunStatus::MaxSteps,
                       RunStatus::InfeasibleAtStep}) {
    if (s == to_string(st)) return st;
  }
  return std::nullopt;
}

std::string summary_fields(const RunSummary& s) {
  return fmt::format("{},{},{},{},{}", to_string(s.status), s.k_hat, s.nlp_count,
                     num(s.cost), s.leading_skips);
}

}  // namespace

std::string table1_csv(const SampleSet& samples) {
  long long counts[3] = {0, 0, 0};
  for (const auto& s : samples.feasible) {
    if (s.cls == SampleClass::Lower) ++counts[0];
    if (s.cls == SampleClass::Upper) ++counts[1];
    if (s.cls == SampleClass::Other) ++counts[2];
  }
  const double total = static_cast<double>(samples.feasible.size());
  std::string out = "class,count,percent\n";
  const char* names[3] = {"lower", "upper", "other"};
  for (int i = 0; i < 3; ++i) {
    out += fmt::format("{},{},{}\n", names[i], counts[i],
                       num(total > 0 ? 100.0 * static_cast<double>(counts[i]) / total : 0.0));
  }
  return out;
}

std::string stats_csv(const BatchStats& st) {
  std::string out = "metric,classic,heuristic,percent\n";
  out += fmt::format("cost_performance,{},{},{}\n", num(st.mean_cost_classic),
                     num(st.mean_cost_heuristic), num(st.cost_delta_pct));
  out += fmt::format("solved_nlps,{},{},{}\n", num(st.mean_nlp_classic),
                     num(st.mean_nlp_heuristic), num(st.nlp_saving_pct));
  out += fmt::format("samples,{},{},\n", st.n_samples, st.n_samples);
  out += fmt::format("excluded_infeasible,{},{},\n", st.n_excluded_infeasible,
                     st.n_excluded_infeasible);
  return out;
}

std::string whole_set_csv(const BatchResult& nominal, const SampleSet& samples) {
  long long lower = 0, upper = 0;
  for (const auto& s : samples.feasible) {
    lower += s.cls == SampleClass::Lower ? 1 : 0;
    upper += s.cls == SampleClass::Upper ? 1 : 0;
  }
  const double total = static_cast<double>(samples.feasible.size());
  std::string out = "metric,value\n";
  out += fmt::format("weighted_nlp_saving_percent,{}\n",
                     num(weighted_whole_set_saving(nominal, samples.feasible)));
  out += fmt::format("pooled_nlp_saving_percent,{}\n", num(nominal.all.nlp_saving_pct));
  out += fmt::format("pooled_cost_delta_percent,{}\n", num(nominal.all.cost_delta_pct));
  out += fmt::format("lower_share_percent,{}\n", num(100.0 * static_cast<double>(lower) / total));
  out += fmt::format("upper_share_percent,{}\n", num(100.0 * static_cast<double>(upper) / total));
  return out;
}

std::string runs_csv(const std::vector<PairedRun>& runs) {
  const int n = runs.empty() ? 0 : static_cast<int>(runs.front().x0.size());
  std::string out = "sample,class";
  for (int i = 0; i < n; ++i) out += fmt::format(",x{}", i + 1);
  for (const char* mode : {"classic", "heuristic"}) {
    out += fmt::format(",{0}_status,{0}_k_hat,{0}_nlp,{0}_cost,{0}_leading_skips", mode);
  }
  out += ",excluded\n";
  for (const auto& r : runs) {
    out += fmt::format("{},{}", r.sample, to_string(r.cls));
    for (int i = 0; i < n; ++i) out += "," + num(r.x0(i));
    out += "," + summary_fields(r.classic) + "," + summary_fields(r.heuristic);
    out += r.excluded ? ",1\n" : ",0\n";
  }
  return out;
}

std::vector<PairedRun> read_runs_csv(const fs::path& path) {
  std::vector<std::string> header;
  const auto rows = read_rows(path, &header);
  const int n = count_prefixed(header, "x");
  const std::size_t width = 2 + static_cast<std::size_t>(n) + 10 + 1;
  if (header.size() != width || header[0] != "sample") {
    throw std::runtime_error(fmt::format("'{}' does not look like a runs file", path.string()));
  }
  std::vector<PairedRun> runs;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != width) bad_row(path, r, "wrong number of fields");
    PairedRun run;
    run.sample = to_int(path, r, f[0]);
    const auto cls = sample_class_from_string(f[1]);
    if (!cls) bad_row(path, r, "unknown class '" + f[1] + "'");
    run.cls = *cls;
    run.x0.resize(n);
    for (int i = 0; i < n; ++i) run.x0(i) = to_double(path, r, f[2 + static_cast<std::size_t>(i)]);
    std::size_t c = 2 + static_cast<std::size_t>(n);
    for (RunSummary* s : {&run.classic, &run.heuristic}) {
      const auto st = run_status_from_string(f[c]);
      if (!st) bad_row(path, r, "unknown status '" + f[c] + "'");
      s->status = *st;
      s->k_hat = static_cast<int>(to_int(path, r, f[c + 1]));
      s->nlp_count = static_cast<int>(to_int(path, r, f[c + 2]));
      s->cost = to_double(path, r, f[c + 3]);
      s->leading_skips = static_cast<int>(to_int(path, r, f[c + 4]));
      c += 5;
    }
    run.excluded = f[c] == "1";
    runs.push_back(std::move(run));
  }
  return runs;
}

std::string samples_csv(const SampleSet& samples) {
  std::vector<const ClassifiedSample*> all;
  for (const auto& s : samples.feasible) all.push_back(&s);
  for (const auto& s : samples.rejected) all.push_back(&s);
  std::sort(all.begin(), all.end(),
            [](const ClassifiedSample* a, const ClassifiedSample* b) { return a->index < b->index; });
  const int n = all.empty() ? 0 : static_cast<int>(all.front()->x0.size());
  std::string out = "index";
  for (int i = 0; i < n; ++i) out += fmt::format(",x{}", i + 1);
  out += ",class\n";
  for (const auto* s : all) {
    out += fmt::format("{}", s->index);
    for (int i = 0; i < n; ++i) out += "," + num(s->x0(i));
    out += fmt::format(",{}\n", to_string(s->cls));
  }
  return out;
}

std::vector<ClassifiedSample> read_samples_csv(const fs::path& path) {
  std::vector<std::string> header;
  const auto rows = read_rows(path, &header);
  const int n = count_prefixed(header, "x");
  const std::size_t width = 2 + static_cast<std::size_t>(n);
  if (header.size() != width || header[0] != "index" || n == 0) {
    throw std::runtime_error(fmt::format("'{}' does not look like a samples file", path.string()));
  }
  std::vector<ClassifiedSample> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != width) bad_row(path, r, "wrong number of fields");
    ClassifiedSample s;
    s.index = to_int(path, r, f[0]);
    s.x0.resize(n);
    for (int i = 0; i < n; ++i) s.x0(i) = to_double(path, r, f[1 + static_cast<std::size_t>(i)]);
    const auto cls = sample_class_from_string(f.back());
    if (!cls) bad_row(path, r, "unknown class '" + f.back() + "'");
    s.cls = *cls;
    out.push_back(std::move(s));
  }
  return out;
}

std::string grid_csv(const FeasibilityGrid& grid) {
  std::string out = "ix,iy,x1,x2,class\n";
  const auto r = static_cast<std::size_t>(grid.resolution);
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    out += fmt::format("{},{},{},{},{}\n", i % r, i / r, num(grid.points[i](0)),
                       num(grid.points[i](1)), to_string(grid.classes[i]));
  }
  return out;
}

FeasibilityGrid read_grid_csv(const fs::path& path) {
  std::vector<std::string> header;
  const auto rows = read_rows(path, &header);
  if (header.size() != 5 || header[0] != "ix") {
    throw std::runtime_error(fmt::format("'{}' does not look like a grid file", path.string()));
  }
  FeasibilityGrid grid;
  long long max_ix = -1;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != 5) bad_row(path, r, "wrong number of fields");
    max_ix = std::max(max_ix, to_int(path, r, f[0]));
    StateVec x(2);
    x << to_double(path, r, f[2]), to_double(path, r, f[3]);
    const auto cls = grid_class_from_string(f[4]);
    if (!cls) bad_row(path, r, "unknown class '" + f[4] + "'");
    grid.points.push_back(x);
    grid.classes.push_back(*cls);
  }
  grid.resolution = static_cast<int>(max_ix + 1);
  if (grid.resolution <= 0 ||
      grid.points.size() != static_cast<std::size_t>(grid.resolution) * grid.resolution) {
    throw std::runtime_error(fmt::format("'{}' is not a square grid", path.string()));
  }
  return grid;
}

std::string closed_loop_csv(const ClosedLoopResult& result, const OcpSpec& spec) {
  std::ostringstream out;
  write_closed_loop_csv(out, result, spec);
  return out.str();
}

Trajectory to_trajectory(std::string label, const ClosedLoopResult& result) {
  return {std::move(label), result.states, result.nlp_solved};
}

std::string trajectories_csv(const std::vector<std::pair<std::string, ClosedLoopResult>>& runs,
                             const OcpSpec& spec) {
  std::string out;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const std::string body = closed_loop_csv(runs[r].second, spec);
    std::istringstream in(body);
    std::string line;
    std::getline(in, line);
    if (r == 0) out += "label," + line + "\n";
    while (std::getline(in, line)) out += runs[r].first + "," + line + "\n";
  }
  return out;
}

std::vector<Trajectory> read_trajectories_csv(const fs::path& path) {
  std::vector<std::string> header;
  const auto rows = read_rows(path, &header);
  const int n = count_prefixed(header, "x");
  const auto solved_col = std::find(header.begin(), header.end(), "nlp_solved");
  if (header.empty() || header[0] != "label" || n == 0 || solved_col == header.end()) {
    throw std::runtime_error(fmt::format("'{}' does not look like a trajectories file",
                                         path.string()));
  }
  const auto solved = static_cast<std::size_t>(solved_col - header.begin());
  std::vector<Trajectory> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != header.size()) bad_row(path, r, "wrong number of fields");
    if (out.empty() || out.back().label != f[0] || to_int(path, r, f[1]) == 0) {
      out.push_back({f[0], {}, {}});
    }
    StateVec x(n);
    for (int i = 0; i < n; ++i) x(i) = to_double(path, r, f[2 + static_cast<std::size_t>(i)]);
    out.back().states.push_back(x);
    if (!f[solved].empty()) out.back().nlp_solved.push_back(f[solved] == "1");
  }
  return out;
}

std::string descent_csv(const DescentReport& report) {
  std::string out = "sample,step,value,next_value,stage,kkt_residual,iterations\n";
  for (const auto& v : report.violations) {
    out += fmt::format("{},{},{},{},{},{},{}\n", v.sample, v.step, num(v.value),
                       num(v.next_value), num(v.stage), num(v.kkt_residual), v.iterations);
  }
  return out;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string canonical_config(const ExperimentConfig& cfg, const std::string& problem) {
  std::string out;
  out += fmt::format("n_samples={}\nseed={}\ndisturbed={}\n", cfg.n_samples, cfg.seed,
                     cfg.disturbed ? 1 : 0);
  out += "disturbance_lower=";
  for (Eigen::Index i = 0; i < cfg.disturbance_bounds.lower.size(); ++i) {
    out += num(cfg.disturbance_bounds.lower(i)) + ";";
  }
  out += "\ndisturbance_upper=";
  for (Eigen::Index i = 0; i < cfg.disturbance_bounds.upper.size(); ++i) {
    out += num(cfg.disturbance_bounds.upper(i)) + ";";
  }
  out += fmt::format("\ndisturbance_mode={}\nreuse_scope={}\nmax_steps={}\ngrid={}\n",
                     cfg.disturbance_mode == DisturbanceMode::IidPerStep ? "iid" : "constant",
                     to_string(cfg.reuse_scope), cfg.max_steps, cfg.grid_resolution);
  const SolverConfig& s = cfg.solver;
  out += fmt::format("kkt_tol={}\nfeas_tol={}\neps_active={}\nmax_iter={}\n"
                     "init_policy={}\nrestoration_stall_iters={}\n",
                     num(s.kkt_tol), num(s.feas_tol), num(s.eps_active), s.max_iter,
                     s.init_policy == InitPolicy::Zeros ? "zeros" : "warm_start_shift",
                     s.restoration_stall_iters);
  out += "problem=" + problem + "\n";
  return out;
}

std::string manifest_json(const ExperimentConfig& cfg, const std::string& problem) {
  const std::string canon = canonical_config(cfg, problem);
  nlohmann::ordered_json j;
  j["tool"] = "satmpc";
  j["version"] = version();
  j["seed"] = cfg.seed;
  j["config_hash"] = fmt::format("{:016x}", fnv1a(canon));
  j["config"] = canon;
  return j.dump(2) + "\n";
}

}  // namespace satmpc
