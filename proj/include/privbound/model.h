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

// Multi-user problem schema and per-component statistics.
//
// Slack terms. The upper bound charges each component i a utility slack
//   s1_i = I(X_i;Y_i) + H(X_i|Y_i)                  (FRL route)
//   s2_i = I(X_i;Y_i) + ln(I(X_i;Y_i) + 1) + c      (SFRL route, c = 4)
// and uses delta_i = min(s1_i, s2_i). Written per user, the slack sums
// over "j : Y_i in C_j" while indexing users by i, which does not type-check
// literally; reading the slack per component reproduces the weighted sum
// sum_i mu_i delta_i of the final upper bound exactly and corresponds to
// picking the FRL or SFRL route independently for each component. A user's
// slack is then the sum of s_i over the components it demands.

#ifndef PRIVBOUND_MODEL_H_
#define PRIVBOUND_MODEL_H_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "privbound/probcore.h"

namespace privbound {

inline constexpr double kDefaultSfrlConstant = 4.0;
// H(X_i|Y_i) at or below this counts as X_i = f_i(Y_i).
inline constexpr double kDeterministicTolerance = 1e-10;

struct Component {
  std::string name;
  // Matrix as supplied (rows = x), kept for faithful serialization.
  std::vector<std::vector<double>> matrix;
  std::vector<std::string> x_labels;
  std::vector<std::string> y_labels;
  // Joint after dropping zero-probability symbols; kept_* map back.
  Joint2 joint;
  std::vector<std::size_t> kept_x;
  std::vector<std::size_t> kept_y;

  std::size_t x_size() const { return joint.rows(); }
  std::size_t y_size() const { return joint.cols(); }
};

// Validates the matrix and prunes zero-probability rows and columns.
Component make_component(std::string name,
                         std::vector<std::vector<double>> matrix,
                         std::vector<std::string> x_labels = {},
                         std::vector<std::string> y_labels = {});

struct User {
  std::vector<std::size_t> demands;  // component indices, the sub-vector C_j
  double weight = 1.0;               // lambda_j
};

enum class DisplayUnit { kNats, kBits };

struct Options {
  DisplayUnit display = DisplayUnit::kNats;
  double sfrl_constant = kDefaultSfrlConstant;
};

struct Problem {
  std::vector<Component> components;
  std::vector<User> users;
  double epsilon = 0.0;
  Options options;
};

struct ComponentStats {
  double h_x = 0;
  double h_y = 0;
  double h_y_given_x = 0;
  double h_x_given_y = 0;
  double i_xy = 0;
  double mu = 0;           // sum of weights of users demanding i
  double sfrl_excess = 0;  // ln(i_xy + 1) + c
  double s1 = 0;
  double s2 = 0;
  double delta = 0;
  std::optional<double> gamma;  // empty when h_x == 0
};

struct ProblemStats {
  std::vector<ComponentStats> components;
  double total_mi = 0;
  bool trivial = false;        // epsilon >= sum_i I(X_i;Y_i)
  bool deterministic = false;  // every H(X_i|Y_i) ~ 0
};

// Checks every invariant of `p` and returns its derived statistics.
ProblemStats validate(const Problem& p);

// sum_j lambda_j H(C_j), the value of releasing U = Y. Requires the trivial
// regime.
double trivial_optimum(const Problem& p, const ProblemStats& stats);

// Weight mass per component without the rest of validate().
std::vector<double> weight_mass(const Problem& p);

}  // namespace privbound

#endif  // PRIVBOUND_MODEL_H_
