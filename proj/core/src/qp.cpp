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

#include "satmpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace satmpc {

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Solved: return "solved";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::IterationLimit: return "iteration_limit";
    case QpStatus::NotPositiveDefinite: return "not_positive_definite";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Factorization of the active set in Goldfarb-Idnani form: with H = L L',
// J = L^-T Q and N_active = Q [R; 0]. The first q columns of J span the
// active normals, the rest span their H-orthogonal complement.
class ActiveFactor {
 public:
  ActiveFactor(const Eigen::LLT<Matrix>& llt, Eigen::Index n)
      : J_(llt.matrixU().solve(Matrix::Identity(n, n))), R_(Matrix::Zero(n, n)), n_(n) {}

  Eigen::Index size() const { return q_; }

  // d = J' normal, the coordinates used by every other operation.
  Vector coordinates(const Vector& normal) const { return J_.transpose() * normal; }

  Vector primal_direction(const Vector& d) const {
    return J_.rightCols(n_ - q_) * d.tail(n_ - q_);
  }

  Vector dual_direction(const Vector& d) const {
    if (q_ == 0) return Vector();
    return R_.topLeftCorner(q_, q_).triangularView<Eigen::Upper>().solve(d.head(q_));
  }

  // Rotates d so that only its first q+1 entries are nonzero, then appends
  // it as the new last column of R.
  bool add(Vector d) {
    for (Eigen::Index j = n_ - 1; j > q_; --j) {
      double cc = d(j - 1);
      double ss = d(j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      d(j) = 0.0;
      ss /= h;
      cc /= h;
      if (cc < 0.0) {
        d(j - 1) = -h;
        cc = -cc;
        ss = -ss;
      } else {
        d(j - 1) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (Eigen::Index k = 0; k < n_; ++k) {
        const double t1 = J_(k, j - 1);
        const double t2 = J_(k, j);
        J_(k, j - 1) = t1 * cc + t2 * ss;
        J_(k, j) = xny * (t1 + J_(k, j - 1)) - t2;
      }
    }
    R_.col(q_).head(q_ + 1) = d.head(q_ + 1);
    ++q_;
    return std::abs(d(q_ - 1)) > 1e-14 * std::max(1.0, R_.topLeftCorner(q_, q_).cwiseAbs().maxCoeff());
  }

  // Removes active column l and restores the triangular structure.
  void remove(Eigen::Index l) {
    for (Eigen::Index j = l; j + 1 < q_; ++j) R_.col(j) = R_.col(j + 1);
    R_.col(q_ - 1).setZero();
    --q_;
    for (Eigen::Index j = l; j < q_; ++j) {
      double cc = R_(j, j);
      double ss = R_(j + 1, j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      cc /= h;
      ss /= h;
      R_(j + 1, j) = 0.0;
      if (cc < 0.0) {
        R_(j, j) = -h;
        cc = -cc;
        ss = -ss;
      } else {
        R_(j, j) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (Eigen::Index k = j + 1; k < q_; ++k) {
        const double t1 = R_(j, k);
        const double t2 = R_(j + 1, k);
        R_(j, k) = t1 * cc + t2 * ss;
        R_(j + 1, k) = xny * (t1 + R_(j, k)) - t2;
      }
      for (Eigen::Index k = 0; k < n_; ++k) {
        const double t1 = J_(k, j);
        const double t2 = J_(k, j + 1);
        J_(k, j) = t1 * cc + t2 * ss;
        J_(k, j + 1) = xny * (J_(k, j) + t1) - t2;
      }
    }
  }

 private:
  Matrix J_;
  Matrix R_;
  Eigen::Index n_;
  Eigen::Index q_ = 0;
};

}  // namespace

QpResult solve_qp(const Matrix& H, const Vector& g, const Matrix& C,
                  const Vector& d, const QpOptions& options) {
  const Eigen::Index n = H.rows();
  const Eigen::Index rows = C.rows();
  require(H.cols() == n && g.size() == n, "solve_qp: H and g sizes disagree");
  require(C.cols() == n && d.size() == rows, "solve_qp: C and d sizes disagree");

  QpResult res;
  res.lambda = Vector::Zero(rows);

  Eigen::LLT<Matrix> llt(H);
  if (llt.info() != Eigen::Success) {
    res.status = QpStatus::NotPositiveDefinite;
    res.x = Vector::Zero(n);
    return res;
  }

  Vector row_scale(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    row_scale(i) = std::max(C.row(i).norm(), 1e-300);
  }

  ActiveFactor factor(llt, n);
  Vector x = -llt.solve(g);
  std::vector<int> active;
  std::vector<double> mult;  // multipliers of `active`, same order
  std::vector<char> is_active(static_cast<std::size_t>(rows), 0);

  const int max_iter = options.max_iter > 0
                           ? options.max_iter
                           : 10 * static_cast<int>(rows + n) + 10;
  int iter = 0;

  auto finish = [&](QpStatus status) {
    res.status = status;
    res.x = x;
    res.iterations = iter;
    for (std::size_t j = 0; j < active.size(); ++j) {
      res.lambda(active[j]) = std::max(0.0, mult[j]);
    }
    res.active = active;
    return res;
  };

  while (true) {
    // Most violated inactive row, measured in normalized distance.
    int p = -1;
    double worst = 0.0;
    const double xscale = x.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (is_active[static_cast<std::size_t>(i)]) continue;
      const double s = C.row(i).dot(x) - d(i);
      const double tol = options.feas_tol * (1.0 + std::abs(d(i)) + row_scale(i) * xscale);
      if (s > tol && s / row_scale(i) > worst) {
        worst = s / row_scale(i);
        p = static_cast<int>(i);
      }
    }
    if (p < 0) return finish(QpStatus::Solved);

    // The row enters as the >= constraint (-c_p)'x >= -d_p.
    const Vector normal = -C.row(p).transpose();
    double mult_p = 0.0;
    while (true) {
      if (++iter > max_iter) return finish(QpStatus::IterationLimit);

      const Vector coords = factor.coordinates(normal);
      const Vector z = factor.primal_direction(coords);
      const Vector r = factor.dual_direction(coords);
      const double slack = d(p) - C.row(p).dot(x);  // negative while violated

      double t_dual = kInf;
      int drop = -1;
      for (std::size_t j = 0; j < active.size(); ++j) {
        const double rj = r(static_cast<Eigen::Index>(j));
        if (rj > 0.0) {
          const double t = std::max(0.0, mult[j]) / rj;
          if (t < t_dual) {
            t_dual = t;
            drop = static_cast<int>(j);
          }
        }
      }

      const double curvature = z.dot(normal);
      const bool dependent = curvature <= 1e-12 * coords.squaredNorm();
      const double t_primal = dependent ? kInf : -slack / curvature;

      if (dependent && drop < 0) return finish(QpStatus::Infeasible);

      const double t = std::min(t_dual, t_primal);
      if (!dependent) x += t * z;
      for (std::size_t j = 0; j < active.size(); ++j) {
        mult[j] -= t * r(static_cast<Eigen::Index>(j));
      }
      mult_p += t;

      if (t_primal <= t_dual) {
        factor.add(coords);
        active.push_back(p);
        mult.push_back(mult_p);
        is_active[static_cast<std::size_t>(p)] = 1;
        break;
      }
      factor.remove(drop);
      is_active[static_cast<std::size_t>(active[drop])] = 0;
      active.erase(active.begin() + drop);
      mult.erase(mult.begin() + drop);
    }
  }
}

}  // namespace satmpc
