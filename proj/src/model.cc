// Copyright 2026 The privbound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "privbound/model.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "privbound/errors.h"

namespace privbound {

Component make_component(std::string name,
                         std::vector<std::vector<double>> matrix,
                         std::vector<std::string> x_labels,
                         std::vector<std::string> y_labels) {
  const std::string what = "component '" + name + "'";
  if (matrix.empty() || matrix.front().empty()) {
    throw Error(ErrorCode::kInvariant, what + ": empty matrix");
  }
  const std::size_t rows = matrix.size();
  const std::size_t cols = matrix.front().size();
  std::vector<double> flat;
  flat.reserve(rows * cols);
  for (const auto& r : matrix) {
    if (r.size() != cols) {
      throw Error(ErrorCode::kSchema, what + ": matrix rows differ in length");
    }
    flat.insert(flat.end(), r.begin(), r.end());
  }
  if (!x_labels.empty() && x_labels.size() != rows) {
    throw Error(ErrorCode::kSchema, what + ": x label count mismatch");
  }
  if (!y_labels.empty() && y_labels.size() != cols) {
    throw Error(ErrorCode::kSchema, what + ": y label count mismatch");
  }
  flat = normalize_checked(std::move(flat), what);

  std::vector<double> row_mass(rows, 0.0);
  std::vector<double> col_mass(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      row_mass[r] += flat[r * cols + c];
      col_mass[c] += flat[r * cols + c];
    }
  }
  std::vector<std::size_t> kept_x, kept_y;
  for (std::size_t r = 0; r < rows; ++r) {
    if (row_mass[r] >= kZeroProb) kept_x.push_back(r);
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (col_mass[c] >= kZeroProb) kept_y.push_back(c);
  }
  std::vector<double> pruned;
  pruned.reserve(kept_x.size() * kept_y.size());
  for (std::size_t r : kept_x) {
    for (std::size_t c : kept_y) pruned.push_back(flat[r * cols + c]);
  }
  Joint2 joint(kept_x.size(), kept_y.size(), std::move(pruned));
  return Component{std::move(name), std::move(matrix), std::move(x_labels),
                   std::move(y_labels), std::move(joint), std::move(kept_x),
                   std::move(kept_y)};
}

std::vector<double> weight_mass(const Problem& p) {
  std::vector<double> mu(p.components.size(), 0.0);
  for (const auto& u : p.users) {
    for (std::size_t i : u.demands) {
      if (i < mu.size()) mu[i] += u.weight;
    }
  }
  return mu;
}

ProblemStats validate(const Problem& p) {
  if (p.components.empty()) {
    throw Error(ErrorCode::kInvariant, "problem has no components");
  }
  if (p.users.empty()) throw Error(ErrorCode::kInvariant, "problem has no users");
  if (!std::isfinite(p.epsilon) || p.epsilon < 0) {
    throw Error(ErrorCode::kInvariant, "epsilon must be finite and >= 0");
  }
  const double c = p.options.sfrl_constant;
  if (!std::isfinite(c) || c < 0) {
    throw Error(ErrorCode::kInvariant, "sfrl_constant must be finite and >= 0");
  }
  for (std::size_t j = 0; j < p.users.size(); ++j) {
    const auto& u = p.users[j];
    std::ostringstream who;
    who << "user " << j;
    if (u.demands.empty()) {
      throw Error(ErrorCode::kInvariant, who.str() + ": empty demand set");
    }
    std::set<std::size_t> seen;
    for (std::size_t i : u.demands) {
      if (i >= p.components.size()) {
        throw Error(ErrorCode::kInvariant,
                    who.str() + ": demand index out of range");
      }
      if (!seen.insert(i).second) {
        throw Error(ErrorCode::kInvariant, who.str() + ": duplicate demand");
      }
    }
    if (!std::isfinite(u.weight) || u.weight < 0) {
      throw Error(ErrorCode::kInvariant, who.str() + ": negative weight");
    }
  }

  const auto mu = weight_mass(p);
  ProblemStats out;
  out.deterministic = true;
  for (std::size_t i = 0; i < p.components.size(); ++i) {
    const Joint2& j = p.components[i].joint;
    ComponentStats s;
    s.h_x = entropy(j.row_marginal());
    s.h_y = entropy(j.col_marginal());
    s.h_y_given_x = conditional_entropy(j, Axis::kRows);
    s.h_x_given_y = conditional_entropy(j, Axis::kCols);
    s.i_xy = mutual_information(j);
    s.mu = mu[i];
    s.sfrl_excess = std::log(s.i_xy + 1.0) + c;
    s.s1 = s.i_xy + s.h_x_given_y;
    s.s2 = s.i_xy + s.sfrl_excess;
    s.delta = std::min(s.s1, s.s2);
    if (s.h_x > kZeroProb) {
      s.gamma = 1.0 - s.h_x_given_y / s.h_x + s.sfrl_excess / s.h_x;
    }
    out.total_mi += s.i_xy;
    out.deterministic = out.deterministic &&
                        s.h_x_given_y <= kDeterministicTolerance;
    out.components.push_back(s);
  }
  out.trivial = p.epsilon >= out.total_mi;
  return out;
}

double trivial_optimum(const Problem& p, const ProblemStats& stats) {
  if (!stats.trivial) {
    throw Error(ErrorCode::kRegime,
                "trivial optimum requires epsilon >= sum_i I(X_i;Y_i)");
  }
  double v = 0.0;
  for (const auto& u : p.users) {
    for (std::size_t i : u.demands) v += u.weight * stats.components[i].h_y;
  }
  return v;
}

}  // namespace privbound
