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

#include "satmpc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>

#include <fmt/format.h>

#include "satmpc/qp.hpp"

namespace satmpc {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  require(kkt_tol > 0.0 && feas_tol > 0.0 && eps_active > 0.0,
          "SolverConfig: tolerances must be positive");
  require(eps_active >= feas_tol, "SolverConfig: eps_active must be >= feas_tol");
  require(max_iter >= 1, "SolverConfig: max_iter must be at least 1");
  require(restoration_stall_iters >= 1,
          "SolverConfig: restoration_stall_iters must be at least 1");
}

int ActiveSet::count() const {
  return static_cast<int>(std::count(rows.begin(), rows.end(), true));
}

double KktReport::max() const {
  return std::max({stationarity, complementarity, violation, dual_infeasibility});
}

namespace {

constexpr double kArmijo = 1e-4;

struct Context {
  const OcpSpec& spec;
  const DynamicsModel& model;
  const StateVec& x0;
  ConstraintLayout layout;
};

// Appends solver iterates to a CSV file when tracing is enabled.
class Trace {
 public:
  explicit Trace(const std::string& path) {
    if (path.empty()) return;
    const bool fresh = !std::ifstream(path).good();
    out_ = std::make_unique<std::ofstream>(path, std::ios::app);
    if (!*out_) throw std::runtime_error("cannot open solver trace file '" + path + "'");
    if (fresh) *out_ << "iter,phase,cost,max_violation,merit,step,kkt\n";
  }

  void row(int iter, const char* phase, double cost, double viol, double merit,
           double step, double kkt) {
    if (!out_) return;
    *out_ << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", iter,
                         phase, cost, viol, merit, step, kkt);
  }

 private:
  std::unique_ptr<std::ofstream> out_;
};

double max_violation(const Vector& g) { return std::max(0.0, g.maxCoeff()); }

double l1_violation(const Vector& g) { return g.cwiseMax(0.0).sum(); }

void project_inputs(const OcpSpec& spec, DecisionVector& U) {
  const int m = spec.input_dim();
  for (int k = 0; k < spec.horizon; ++k) {
    for (int j = 0; j < m; ++j) {
      double& u = U(k * m + j);
      u = std::clamp(u, spec.u_lower(j), spec.u_upper(j));
    }
  }
}

// Mirrors negative curvature and floors the spectrum so the QP stays
// strictly convex.
Matrix positive_definite(const Matrix& H) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
  Vector ev = eig.eigenvalues();
  const double floor = 1e-6 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() >= floor) return H;
  ev = ev.cwiseAbs().cwiseMax(floor);
  return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
}

struct RestorationResult {
  bool ok = false;
  DecisionVector U;
  int iterations = 0;
};

// Gauss-Newton / Levenberg-Marquardt on 0.5 * sum max(0, G_i)^2 over the
// non-input rows, with the input box and the currently satisfied rows kept as
// linearized inequalities.
RestorationResult restore(const Context& ctx, DecisionVector U,
                          const SolverConfig& cfg, Trace& trace, int outer_iter) {
  const int rows = ctx.layout.size();
  const int first = ctx.layout.input_rows();
  const Eigen::Index nu = U.size();
  const double target = 1e-3 * cfg.feas_tol;

  auto violation_of = [&](const Vector& g) {
    return std::max(0.0, g.tail(rows - first).maxCoeff());
  };
  auto psi_of = [&](const Vector& g) {
    return 0.5 * g.tail(rows - first).cwiseMax(0.0).squaredNorm();
  };

  RestorationResult res;
  double best = std::numeric_limits<double>::infinity();
  int stall = 0;
  const int cap = std::max(cfg.max_iter, 4 * cfg.restoration_stall_iters);

  for (int it = 0; it < cap; ++it) {
    res.iterations = it + 1;
    const ShootingEvaluation ev = evaluate_shooting(ctx.spec, ctx.model, ctx.x0, U);
    const double viol = violation_of(ev.g);
    const double psi = psi_of(ev.g);
    trace.row(outer_iter, "restoration", ev.cost, viol, psi, 0.0, 0.0);
    if (viol <= target) {
      res.ok = true;
      res.U = U;
      return res;
    }
    if (viol < 0.99 * best) {
      best = viol;
      stall = 0;
    } else if (++stall >= cfg.restoration_stall_iters) {
      break;
    }

    std::vector<int> violated;
    std::vector<int> kept;
    for (int i = 0; i < rows; ++i) {
      if (i >= first && ev.g(i) > 0.0) {
        violated.push_back(i);
      } else {
        kept.push_back(i);
      }
    }
    Matrix Jv(static_cast<Eigen::Index>(violated.size()), nu);
    Vector r(static_cast<Eigen::Index>(violated.size()));
    for (std::size_t a = 0; a < violated.size(); ++a) {
      Jv.row(static_cast<Eigen::Index>(a)) = ev.jacobian.row(violated[a]);
      r(static_cast<Eigen::Index>(a)) = ev.g(violated[a]);
    }
    Matrix C(static_cast<Eigen::Index>(kept.size()), nu);
    Vector d(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t a = 0; a < kept.size(); ++a) {
      C.row(static_cast<Eigen::Index>(a)) = ev.jacobian.row(kept[a]);
      d(static_cast<Eigen::Index>(a)) = -ev.g(kept[a]);
    }
    const double mu = 1e-12 + r.norm();
    const Matrix H = Jv.transpose() * Jv + mu * Matrix::Identity(nu, nu);
    const Vector grad = Jv.transpose() * r;
    const QpResult qp = solve_qp(H, grad, C, d);
    if (qp.status != QpStatus::Solved || qp.x.cwiseAbs().maxCoeff() < 1e-15) break;

    const double slope = grad.dot(qp.x);
    // A stationary point of the violation: no direction reduces it further.
    if (-slope <= 1e-9 * psi) break;
    double t = 1.0;
    bool moved = false;
    while (t > 1e-12) {
      DecisionVector trial = U + t * qp.x;
      project_inputs(ctx.spec, trial);
      double cost = 0.0;
      Vector g;
      evaluate_values(ctx.spec, ctx.model, ctx.x0, trial, cost, g);
      if (psi_of(g) <= psi + kArmijo * t * std::min(slope, 0.0)) {
        U = trial;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  res.ok = false;
  res.U = U;
  return res;
}

// Inputs held at u_lower, u_upper, u_lower / 2 and u_upper / 2.
std::vector<DecisionVector> restoration_starts(const OcpSpec& spec) {
  const int N = spec.horizon;
  std::vector<DecisionVector> out;
  for (const Vector* bound : {&spec.u_lower, &spec.u_upper}) {
    for (double scale : {1.0, 0.5}) {
      out.push_back(bound->replicate(N, 1) * scale);
    }
  }
  std::swap(out[1], out[2]);  // lower, upper, lower / 2, upper / 2
  return out;
}

// Projected gradient step on V + rho/2 sum max(0, G_i)^2 over the input box.
DecisionVector projected_gradient_step(const Context& ctx, const DecisionVector& U,
                                       double rho) {
  const ShootingEvaluation ev = evaluate_shooting(ctx.spec, ctx.model, ctx.x0, U);
  const Vector viol = ev.g.cwiseMax(0.0);
  const double psi0 = ev.cost + 0.5 * rho * viol.squaredNorm();
  const Vector grad = ev.gradient + rho * ev.jacobian.transpose() * viol;
  double t = 1.0;
  while (t > 1e-12) {
    DecisionVector trial = U - t * grad;
    project_inputs(ctx.spec, trial);
    double cost = 0.0;
    Vector g;
    evaluate_values(ctx.spec, ctx.model, ctx.x0, trial, cost, g);
    const double psi = cost + 0.5 * rho * g.cwiseMax(0.0).squaredNorm();
    if (psi <= psi0 - kArmijo / t * (trial - U).squaredNorm()) return trial;
    t *= 0.5;
  }
  return U;
}

KktReport kkt_from_evaluation(const ShootingEvaluation& ev, const Vector& lambda) {
  KktReport r;
  r.stationarity =
      (ev.gradient + ev.jacobian.transpose() * lambda).cwiseAbs().maxCoeff();
  r.complementarity = lambda.cwiseProduct(ev.g).cwiseAbs().maxCoeff();
  r.violation = max_violation(ev.g);
  r.dual_infeasibility = std::max(0.0, -lambda.minCoeff());
  return r;
}

NlpSolution finalize(const Context& ctx, const SolverConfig& cfg,
                     DecisionVector U, const Vector& lambda, SolveStatus status,
                     int iterations, int restoration_iterations) {
  NlpSolution sol;
  const ShootingEvaluation ev = evaluate_shooting(ctx.spec, ctx.model, ctx.x0, U);
  const KktReport kkt = kkt_from_evaluation(ev, lambda);
  sol.U = std::move(U);
  sol.V = ev.cost;
  sol.status = status;
  sol.kkt_residual = std::max(kkt.stationarity, kkt.complementarity);
  sol.feas_violation = kkt.violation;
  sol.multipliers = lambda;
  sol.iterations = iterations;
  sol.restoration_iterations = restoration_iterations;
  if (status == SolveStatus::Optimal) {
    sol.active = extract_active_set(ctx.spec, ctx.model, ctx.x0, sol.U, cfg.eps_active);
  } else {
    sol.active.horizon = ctx.spec.horizon;
    sol.active.input_dim = ctx.spec.input_dim();
    sol.active.rows.assign(static_cast<std::size_t>(ctx.layout.size()), false);
    sol.active.input_lower.assign(static_cast<std::size_t>(ctx.spec.num_decisions()), false);
    sol.active.input_upper.assign(static_cast<std::size_t>(ctx.spec.num_decisions()), false);
  }
  return sol;
}

}  // namespace

NlpSolution solve(const OcpSpec& spec, const DynamicsModel& model,
                  const StateVec& x0, const SolverConfig& cfg,
                  const std::optional<DecisionVector>& warm) {
  cfg.validate();
  require(model.state_dim() == spec.state_dim() &&
              model.input_dim() == spec.input_dim(),
          "solve: model and OcpSpec dimensions disagree");
  require(x0.size() == spec.state_dim() && x0.allFinite(),
          "solve: x0 must be a finite vector of length n");

  const Context ctx{spec, model, x0, ConstraintLayout(spec)};
  const Eigen::Index nu = spec.num_decisions();

  DecisionVector U = DecisionVector::Zero(nu);
  if (warm && cfg.init_policy == InitPolicy::WarmStartShift) {
    require(warm->size() == nu && warm->allFinite(),
            "solve: warm start must be a finite vector of length N*m");
    U = *warm;
  }
  project_inputs(spec, U);

  Vector lambda = Vector::Zero(ctx.layout.size());
  if (!in_state_box(spec, x0)) {
    return finalize(ctx, cfg, U, lambda, SolveStatus::Infeasible, 0, 0);
  }

  Trace trace(cfg.trace_path);
  const std::vector<DecisionVector> restarts = restoration_starts(spec);
  std::size_t next_start = 0;
  double rho = 1.0;
  int restoration_iterations = 0;

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const ShootingEvaluation ev = evaluate_shooting(spec, model, x0, U);
    const Matrix H = positive_definite(lagrangian_hessian(spec, model, x0, U, lambda));
    const QpResult qp = solve_qp(H, ev.gradient, ev.jacobian, -ev.g);

    if (qp.status == QpStatus::Infeasible) {
      RestorationResult rest = restore(ctx, U, cfg, trace, iter);
      restoration_iterations += rest.iterations;
      // Restoration is local; restart SQP from the remaining fixed starts
      // before declaring the problem infeasible.
      if (!rest.ok && next_start < restarts.size()) {
        U = restarts[next_start++];
        lambda.setZero();
        rho = 1.0;
        continue;
      }
      if (!rest.ok) {
        return finalize(ctx, cfg, rest.U, Vector::Zero(ctx.layout.size()),
                        SolveStatus::Infeasible, iter + 1, restoration_iterations);
      }
      U = rest.U;
      lambda.setZero();
      continue;
    }
    if (qp.status != QpStatus::Solved) {
      trace.row(iter, "fallback", ev.cost, max_violation(ev.g), 0.0, 0.0, 0.0);
      U = projected_gradient_step(ctx, U, std::max(rho, 1.0));
      continue;
    }

    const KktReport kkt = kkt_from_evaluation(ev, qp.lambda);
    if (kkt.stationarity <= cfg.kkt_tol && kkt.complementarity <= cfg.kkt_tol &&
        kkt.violation <= cfg.feas_tol) {
      trace.row(iter, "converged", ev.cost, kkt.violation, ev.cost, 0.0,
                std::max(kkt.stationarity, kkt.complementarity));
      return finalize(ctx, cfg, U, qp.lambda, SolveStatus::Optimal, iter + 1,
                      restoration_iterations);
    }
    lambda = qp.lambda;
    // Powell's rule: rho stays above 2|lambda| but may decay once the
    // multipliers shrink, so an early spike does not freeze the step length.
    const double rho_min = 2.0 * lambda.cwiseAbs().maxCoeff();
    rho = std::max(rho_min, 0.5 * (rho + rho_min));

    const Vector& step = qp.x;
    const double merit0 = ev.cost + rho * l1_violation(ev.g);
    const double slope = ev.gradient.dot(step) - rho * l1_violation(ev.g);

    auto merit_at = [&](const DecisionVector& trial, Vector* g_out) {
      double cost = 0.0;
      Vector g;
      evaluate_values(spec, model, x0, trial, cost, g);
      const double merit = cost + rho * l1_violation(g);
      if (g_out) *g_out = std::move(g);
      return merit;
    };

    DecisionVector next = U + step;
    project_inputs(spec, next);
    Vector g_full;
    const double merit_full = merit_at(next, &g_full);
    double taken = 1.0;
    bool accepted = merit_full <= merit0 + kArmijo * slope ||
                    slope > -1e-15 * (1.0 + std::abs(merit0));

    if (!accepted) {
      // Second-order correction: re-linearize the constraints at U + step.
      const QpResult soc =
          solve_qp(H, ev.gradient, ev.jacobian, ev.jacobian * step - g_full);
      if (soc.status == QpStatus::Solved) {
        DecisionVector corrected = U + soc.x;
        project_inputs(spec, corrected);
        if (merit_at(corrected, nullptr) <= merit0 + kArmijo * slope) {
          next = corrected;
          accepted = true;
        }
      }
    }
    for (double t = 0.5; !accepted && t > 1e-12; t *= 0.5) {
      DecisionVector trial = U + t * step;
      project_inputs(spec, trial);
      if (merit_at(trial, nullptr) <= merit0 + kArmijo * t * slope) {
        next = trial;
        taken = t;
        accepted = true;
      }
    }
    trace.row(iter, "sqp", ev.cost, kkt.violation, merit0, accepted ? taken : 0.0,
              std::max(kkt.stationarity, kkt.complementarity));
    if (!accepted) next = projected_gradient_step(ctx, U, rho);
    U = std::move(next);
  }

  return finalize(ctx, cfg, U, lambda, SolveStatus::MaxIter, cfg.max_iter,
                  restoration_iterations);
}

ActiveSet extract_active_set(const OcpSpec& spec, const DynamicsModel& model,
                             const StateVec& x0, const DecisionVector& U,
                             double eps_active) {
  require(eps_active > 0.0, "extract_active_set: eps_active must be positive");
  const ConstraintLayout layout(spec);
  const Vector g = constraints(spec, model, x0, U);
  ActiveSet a;
  a.horizon = spec.horizon;
  a.input_dim = spec.input_dim();
  a.rows.resize(static_cast<std::size_t>(layout.size()));
  for (int i = 0; i < layout.size(); ++i) a.rows[i] = g(i) >= -eps_active;
  a.input_lower.resize(static_cast<std::size_t>(spec.num_decisions()));
  a.input_upper.resize(static_cast<std::size_t>(spec.num_decisions()));
  for (int k = 0; k < spec.horizon; ++k) {
    for (int j = 0; j < a.input_dim; ++j) {
      a.input_lower[k * a.input_dim + j] = a.rows[layout.input_lower(k, j)];
      a.input_upper[k * a.input_dim + j] = a.rows[layout.input_upper(k, j)];
    }
  }
  return a;
}

ActiveSet extract_active_set(const OcpSpec& spec, const DynamicsModel& model,
                             const StateVec& x0, const NlpSolution& sol,
                             double eps_active) {
  require(sol.status == SolveStatus::Optimal,
          "extract_active_set: solution is not optimal");
  return extract_active_set(spec, model, x0, sol.U, eps_active);
}

bool check_feasible(const OcpSpec& spec, const DynamicsModel& model,
                    const StateVec& x0, const SolverConfig& cfg) {
  SolverConfig cold = cfg;
  cold.init_policy = InitPolicy::Zeros;
  return solve(spec, model, x0, cold).status == SolveStatus::Optimal;
}

KktReport kkt_report(const OcpSpec& spec, const DynamicsModel& model,
                     const StateVec& x0, const DecisionVector& U,
                     const Vector& lambda) {
  const ShootingEvaluation ev = evaluate_shooting(spec, model, x0, U);
  require(lambda.size() == ev.g.size(), "kkt_report: multiplier size");
  return kkt_from_evaluation(ev, lambda);
}

// ---------------------------------------------------------------------------
// Grid oracle

namespace {

struct OracleSearch {
  const OcpSpec& spec;
  const DynamicsModel& model;
  int levels;
  int cap;
  std::vector<InputVec> grid;  // all input combinations on the grid
  DecisionVector U;
  OracleResult best;

  void finish(const StateVec& x_cap, double prefix_cost) {
    ++best.evaluated;
    const int N = spec.horizon;
    const int m = spec.input_dim();
    StateVec x = x_cap;
    double cost = prefix_cost;
    for (int k = cap; k < N; ++k) {
      const InputVec u = U.segment(k * m, m);
      if (k >= 1 && !in_state_box(spec, x)) return;
      cost += stage_cost(spec, x, u);
      x = model.step(x, u);
    }
    if (!in_terminal_set(spec, x)) return;
    cost += terminal_cost(spec, x);
    if (!best.feasible || cost < best.cost) {
      best.feasible = true;
      best.cost = cost;
      best.U = U;
    }
  }

  void descend(int k, const StateVec& x, double cost) {
    if (k == cap) {
      finish(x, cost);
      return;
    }
    // State rows bind from k = 1 on; a violation cannot be undone later.
    if (k >= 1 && !in_state_box(spec, x)) {
      return;
    }
    const int m = spec.input_dim();
    for (const InputVec& u : grid) {
      U.segment(k * m, m) = u;
      descend(k + 1, model.step(x, u), cost + stage_cost(spec, x, u));
    }
  }
};

}  // namespace

OracleResult grid_search_oracle(const OcpSpec& spec, const DynamicsModel& model,
                                const StateVec& x0, int levels_per_input,
                                int horizon_cap,
                                const std::optional<DecisionVector>& tail) {
  require(levels_per_input >= 2, "grid_search_oracle: need at least two levels");
  require(horizon_cap >= 1 && horizon_cap <= spec.horizon,
          "grid_search_oracle: horizon_cap must be in [1, N]");
  const int m = spec.input_dim();
  const double combos = std::pow(static_cast<double>(levels_per_input), m * horizon_cap);
  require(combos <= 5e7, "grid_search_oracle: grid too large to enumerate");

  OracleSearch search{spec, model, levels_per_input, horizon_cap, {}, {}, {}};
  search.U = DecisionVector::Zero(spec.num_decisions());
  if (tail) {
    require(tail->size() == spec.num_decisions(),
            "grid_search_oracle: tail must be a full-length decision vector");
    search.U = *tail;
  }

  // Enumerate the per-step input grid (levels^m combinations).
  const int per_step = static_cast<int>(std::pow(levels_per_input, m));
  for (int idx = 0; idx < per_step; ++idx) {
    InputVec u(m);
    int rem = idx;
    for (int j = 0; j < m; ++j) {
      const int level = rem % levels_per_input;
      rem /= levels_per_input;
      u(j) = spec.u_lower(j) + (spec.u_upper(j) - spec.u_lower(j)) * level /
                                   (levels_per_input - 1);
    }
    search.grid.push_back(u);
  }

  if (!in_state_box(spec, x0)) return search.best;
  search.descend(0, x0, 0.0);
  return search.best;
}

}  // namespace satmpc
