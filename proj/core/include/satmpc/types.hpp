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

#ifndef SATMPC_TYPES_HPP
#define SATMPC_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace satmpc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// State x(k), length n.
using StateVec = Eigen::VectorXd;
/// Input u(k), length m.
using InputVec = Eigen::VectorXd;
/// Additive disturbance w, length n.
using DisturbanceVec = Eigen::VectorXd;
/// Stacked inputs U = (u(0), ..., u(N-1)), length N*m, input-major per step.
using DecisionVector = Eigen::VectorXd;

/// Raised when a caller breaks a documented precondition (dimension
/// mismatch, non-finite data, malformed problem data).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

inline bool all_finite(const Eigen::Ref<const Vector>& v) {
  return v.allFinite();
}

}  // namespace satmpc

#endif  // SATMPC_TYPES_HPP
