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

#include "satmpc/problem_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "json.hpp"

namespace satmpc {

using nlohmann::json;

namespace {

Vector vector_from_json(const json& j, const char* what) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  require(j.is_array(), fmt::format("{}: expected an array of numbers", what));
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_number(), fmt::format("{}: entry {} is not a number", what, i));
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from_json(const json& j, const char* what) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  require(j.is_array() && !j.empty() && j[0].is_array(),
          fmt::format("{}: expected a number or a nested array", what));
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == cols,
            fmt::format("{}: ragged matrix", what));
    for (Eigen::Index c = 0; c < cols; ++c) {
      require(row[static_cast<std::size_t>(c)].is_number(),
              fmt::format("{}: non-numeric entry", what));
      M(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return M;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_to_json(const Matrix& M) {
  json out = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    out.push_back(row);
  }
  return out;
}

const json& field(const json& doc, const char* key) {
  require(doc.contains(key), fmt::format("problem document is missing \"{}\"", key));
  return doc.at(key);
}

OcpSpec ocp_from_document(const json& doc) {
  require(doc.is_object(), "problem document must be a JSON object");
  OcpSpec s;
  const json& N = field(doc, "N");
  require(N.is_number_integer(), "\"N\" must be an integer");
  s.horizon = N.get<int>();
  s.Q = matrix_from_json(field(doc, "Q"), "Q");
  s.R = matrix_from_json(field(doc, "R"), "R");
  s.P = matrix_from_json(field(doc, "P"), "P");
  require(field(doc, "alpha").is_number(), "\"alpha\" must be a number");
  s.alpha = doc.at("alpha").get<double>();
  const json& xb = field(doc, "x_bounds");
  const json& ub = field(doc, "u_bounds");
  s.x_lower = vector_from_json(field(xb, "lower"), "x_bounds.lower");
  s.x_upper = vector_from_json(field(xb, "upper"), "x_bounds.upper");
  s.u_lower = vector_from_json(field(ub, "lower"), "u_bounds.lower");
  s.u_upper = vector_from_json(field(ub, "upper"), "u_bounds.upper");
  s.validate();
  return s;
}

PolynomialTable polynomial_from_document(const json& doc) {
  require(doc.is_object(), "polynomial model must be a JSON object");
  PolynomialTable t;
  t.state_dim = field(doc, "state_dim").get<int>();
  t.input_dim = field(doc, "input_dim").get<int>();
  const json& rows = field(doc, "rows");
  require(rows.is_array(), "polynomial model: \"rows\" must be an array");
  for (const json& row : rows) {
    require(row.is_array(), "polynomial model: each row must be an array of terms");
    std::vector<Monomial> terms;
    for (const json& term : row) {
      Monomial mono;
      mono.coeff = field(term, "coeff").get<double>();
      mono.x_powers = field(term, "x").get<std::vector<int>>();
      mono.u_powers = field(term, "u").get<std::vector<int>>();
      terms.push_back(std::move(mono));
    }
    t.rows.push_back(std::move(terms));
  }
  t.validate();
  return t;
}

json parse_or_throw(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(fmt::format("{}: invalid JSON: {}", origin, e.what()));
  }
}

}  // namespace

OcpSpec ocp_from_json(const std::string& text) {
  return ocp_from_document(parse_or_throw(text, "problem"));
}

std::string ocp_to_json(const OcpSpec& spec) {
  json doc;
  doc["N"] = spec.horizon;
  doc["Q"] = matrix_to_json(spec.Q);
  doc["R"] = matrix_to_json(spec.R);
  doc["P"] = matrix_to_json(spec.P);
  doc["alpha"] = spec.alpha;
  doc["x_bounds"] = {{"lower", vector_to_json(spec.x_lower)},
                     {"upper", vector_to_json(spec.x_upper)}};
  doc["u_bounds"] = {{"lower", vector_to_json(spec.u_lower)},
                     {"upper", vector_to_json(spec.u_upper)}};
  return doc.dump(2);
}

PolynomialTable polynomial_table_from_json(const std::string& text) {
  return polynomial_from_document(parse_or_throw(text, "polynomial model"));
}

Problem benchmark_problem() { return Problem{benchmark_ocp(), benchmark_model()}; }

Problem load_problem(const std::string& path_or_name) {
  if (path_or_name == "benchmark") return benchmark_problem();

  std::ifstream in(path_or_name);
  if (!in) {
    throw std::runtime_error(
        fmt::format("cannot read problem file '{}'", path_or_name));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const json doc = parse_or_throw(buf.str(), path_or_name);

  try {
    OcpSpec spec = ocp_from_document(doc);
    DynamicsModel model = benchmark_model();
    if (doc.contains("model")) {
      const json& m = doc.at("model");
      if (!(m.is_string() && m.get<std::string>() == "benchmark")) {
        model = polynomial_model(polynomial_from_document(m), path_or_name);
      }
    }
    require(model.state_dim() == spec.state_dim() &&
                model.input_dim() == spec.input_dim(),
            "model dimensions do not match Q/R");
    return Problem{std::move(spec), std::move(model)};
  } catch (const ContractViolation& e) {
    throw std::runtime_error(fmt::format("{}: {}", path_or_name, e.what()));
  } catch (const json::exception& e) {
    throw std::runtime_error(fmt::format("{}: {}", path_or_name, e.what()));
  }
}

}  // namespace satmpc
