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

// Closed-form bounds on the weighted multi-user privacy-utility trade-off.
//
// All bounds share one budget-splitting step: with per-component budgets
// eps_i (sum <= epsilon) each bound is affine in eps_i, so the best split
// puts budget on the largest coefficient first. Component i cannot usefully
// absorb more than I(X_i;Y_i): its utility saturates at H(Y_i), and the
// randomized lower-bound constructions are only certified below that. The
// split therefore fills components in coefficient order up to I(X_i;Y_i).
// Whenever epsilon fits on the top component this is exactly
// epsilon * max_i(coefficient_i); BoundsReport::closed_form records it.

#ifndef PRIVBOUND_BOUNDS_H_
#define PRIVBOUND_BOUNDS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "privbound/model.h"

namespace privbound {

// Margin kept below I(X_i;Y_i) when budgets feed a mechanism construction.
inline constexpr double kAllocationMargin = 1e-12;

enum class AllocationVariant { kFrl, kEsfrl };

struct Allocation {
  AllocationVariant variant = AllocationVariant::kFrl;
  std::vector<double> eps_per_component;
  double requested = 0;  // the problem's epsilon
  // Budget left after every eligible component hit its cap.
  double overflow = 0;
  // Components filled to their cap, in fill order.
  std::vector<std::size_t> saturated;

  double total() const;
};

// Greedy solution of max sum coef_i e_i s.t. sum e_i <= budget,
// 0 <= e_i <= cap_i. Ties go to the lowest index.
std::vector<double> fill_by_coefficient(std::span<const double> coef,
                                        std::span<const double> caps,
                                        double budget);

// frl: coefficient mu_i. esfrl: mu_i * gamma_i over components with
// H(X_i) > 0. Each eps_i stays below I(X_i;Y_i) by kAllocationMargin.
Allocation allocate_epsilon(const Problem& p, const ProblemStats& stats,
                            AllocationVariant variant);

double upper_bound(const Problem& p, const ProblemStats& stats);
double lower_bound_frl(const Problem& p, const ProblemStats& stats);
// May be negative; see BoundsReport::lower for the clamped combination.
double lower_bound_sfrl(const Problem& p, const ProblemStats& stats);
// sum_i mu_i (delta_i + H(X_i|Y_i)) == upper_bound - lower_bound_frl.
double gap_identity(const Problem& p, const ProblemStats& stats);

// sum_y integral_0^1 F_y(t) ln F_y(t) dt with F_y(t) = P_X{P(y|X) >= t},
// integrated exactly over the piecewise-constant F_y. Always <= 0.
double excess_integral(const Joint2& j);
double excess_integral(const Component& c);

// Exact value when every X_i = f_i(Y_i).
double deterministic_exact(const Problem& p, const ProblemStats& stats);

struct PerfectPrivacyBlock {
  std::vector<double> u0_first;   // H(Y_i|X_i)
  std::vector<double> u0_second;  // H(Y_i|X_i) + excess + I(X_i;Y_i)
  std::vector<double> excess;
  double upper = 0;  // sum_i mu_i (min(u0_first, u0_second) + delta_i)
};

struct BoundsReport {
  bool trivial = false;
  bool deterministic = false;
  bool perfect_privacy = false;
  double epsilon = 0;

  // Non-trivial regime.
  double upper = 0;
  double lower_frl = 0;
  double lower_sfrl = 0;
  double lower = 0;  // max(0, lower_frl, lower_sfrl)
  double gap = 0;
  // epsilon * max coefficient forms, and whether the capped split equals
  // them.
  double upper_closed_form = 0;
  double lower_frl_closed_form = 0;
  double lower_sfrl_closed_form = 0;
  bool closed_form = true;
  std::vector<double> beta;  // per-component ESFRL terms at the split
  Allocation esfrl_allocation;

  std::optional<PerfectPrivacyBlock> perfect;
  std::optional<double> deterministic_value;
  std::optional<double> trivial_value;
};

// Requires epsilon == 0.
BoundsReport perfect_privacy_bounds(const Problem& p,
                                    const ProblemStats& stats);

// Everything that applies to `p`'s regime.
BoundsReport compute_bounds(const Problem& p, const ProblemStats& stats);

}  // namespace privbound

#endif  // PRIVBOUND_BOUNDS_H_
