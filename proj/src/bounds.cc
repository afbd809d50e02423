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

#include "privbound/bounds.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "privbound/errors.h"

namespace privbound {
namespace {

constexpr double kClosedFormTolerance = 1e-12;

void require_nontrivial(const ProblemStats& s) {
  if (s.trivial) {
    throw Error(ErrorCode::kRegime,
                "bound requires epsilon < sum_i I(X_i;Y_i); use the trivial "
                "optimum");
  }
}

struct Coefficients {
  std::vector<double> coef;
  std::vector<double> caps;
  std::vector<bool> eligible;
};

Coefficients frl_coefficients(const ProblemStats& s, double margin) {
  Coefficients c;
  for (const auto& cs : s.components) {
    c.coef.push_back(cs.mu);
    c.caps.push_back(std::max(cs.i_xy - margin, 0.0));
    c.eligible.push_back(true);
  }
  return c;
}

Coefficients esfrl_coefficients(const ProblemStats& s, double margin) {
  Coefficients c;
  for (const auto& cs : s.components) {
    c.coef.push_back(cs.gamma ? cs.mu * *cs.gamma : 0.0);
    c.caps.push_back(cs.gamma ? std::max(cs.i_xy - margin, 0.0) : 0.0);
    c.eligible.push_back(cs.gamma.has_value());
  }
  return c;
}

std::vector<double> fill(const Coefficients& c, double budget) {
  return fill_by_coefficient(c.coef, c.caps, budget);
}

// Value of the best split and the closed-form epsilon * max coefficient.
std::pair<double, double> split_value(const Coefficients& c, double budget) {
  const auto e = fill(c, budget);
  double v = 0.0;
  double best = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < e.size(); ++i) {
    v += c.coef[i] * e[i];
    if (c.eligible[i] && (!any || c.coef[i] > best)) {
      best = c.coef[i];
      any = true;
    }
  }
  return {v, budget * best};
}

double upper_base(const ProblemStats& s) {
  double v = 0.0;
  for (const auto& c : s.components) v += c.mu * (c.h_y_given_x + c.delta);
  return v;
}

double frl_base(const ProblemStats& s) {
  double v = 0.0;
  for (const auto& c : s.components) {
    v += c.mu * (c.h_y_given_x - c.h_x_given_y);
  }
  return v;
}

double sfrl_base(const ProblemStats& s) {
  double v = 0.0;
  for (const auto& c : s.components) {
    v += c.mu * (c.h_y_given_x - c.sfrl_excess);
  }
  return v;
}

PerfectPrivacyBlock perfect_block(const Problem& p, const ProblemStats& s) {
  PerfectPrivacyBlock b;
  for (std::size_t i = 0; i < p.components.size(); ++i) {
    const auto& cs = s.components[i];
    const double t = excess_integral(p.components[i]);
    b.excess.push_back(t);
    b.u0_first.push_back(cs.h_y_given_x);
    b.u0_second.push_back(cs.h_y_given_x + t + cs.i_xy);
    b.upper += cs.mu * (std::min(b.u0_first.back(), b.u0_second.back()) +
                        cs.delta);
  }
  return b;
}

std::vector<double> beta_terms(const ProblemStats& s,
                               std::span<const double> eps) {
  std::vector<double> beta;
  for (std::size_t i = 0; i < s.components.size(); ++i) {
    const auto& c = s.components[i];
    const double alpha = c.h_x > kZeroProb ? eps[i] / c.h_x : 0.0;
    beta.push_back(c.h_y_given_x - alpha * c.h_x_given_y + eps[i] -
                   (1.0 - alpha) * c.sfrl_excess);
  }
  return beta;
}

}  // namespace

double Allocation::total() const {
  return std::accumulate(eps_per_component.begin(), eps_per_component.end(),
                         0.0);
}

std::vector<double> fill_by_coefficient(std::span<const double> coef,
                                        std::span<const double> caps,
                                        double budget) {
  std::vector<std::size_t> order(coef.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return coef[a] > coef[b]; });
  std::vector<double> out(coef.size(), 0.0);
  double left = budget;
  for (std::size_t i : order) {
    if (left <= 0) break;
    out[i] = std::min(left, caps[i]);
    left -= out[i];
  }
  return out;
}

Allocation allocate_epsilon(const Problem& p, const ProblemStats& stats,
                            AllocationVariant variant) {
  require_nontrivial(stats);
  const Coefficients c = variant == AllocationVariant::kFrl
                             ? frl_coefficients(stats, kAllocationMargin)
                             : esfrl_coefficients(stats, kAllocationMargin);
  if (variant == AllocationVariant::kEsfrl && p.epsilon > 0 &&
      std::none_of(c.eligible.begin(), c.eligible.end(),
                   [](bool b) { return b; })) {
    throw Error(ErrorCode::kRegime,
                "every component has H(X_i) = 0; no ESFRL coefficient exists");
  }
  Allocation a;
  a.variant = variant;
  a.requested = p.epsilon;
  a.eps_per_component = fill(c, p.epsilon);
  a.overflow = std::max(p.epsilon - a.total(), 0.0);
  std::vector<std::size_t> order(c.coef.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return c.coef[x] > c.coef[y];
  });
  for (std::size_t i : order) {
    if (c.eligible[i] && a.eps_per_component[i] > 0 &&
        a.eps_per_component[i] >= c.caps[i]) {
      a.saturated.push_back(i);
    }
  }
  return a;
}

double upper_bound(const Problem& p, const ProblemStats& stats) {
  require_nontrivial(stats);
  return upper_base(stats) + split_value(frl_coefficients(stats, 0), p.epsilon).first;
}

double lower_bound_frl(const Problem& p, const ProblemStats& stats) {
  require_nontrivial(stats);
  return frl_base(stats) + split_value(frl_coefficients(stats, 0), p.epsilon).first;
}

double lower_bound_sfrl(const Problem& p, const ProblemStats& stats) {
  require_nontrivial(stats);
  return sfrl_base(stats) +
         split_value(esfrl_coefficients(stats, 0), p.epsilon).first;
}

double gap_identity(const Problem& /*p*/, const ProblemStats& stats) {
  require_nontrivial(stats);
  double v = 0.0;
  for (const auto& c : stats.components) v += c.mu * (c.delta + c.h_x_given_y);
  return v;
}

double excess_integral(const Joint2& j) {
  const Dist px = j.row_marginal();
  double total = 0.0;
  std::vector<std::pair<double, double>> thresholds;  // (P(y|x), P(x))
  for (std::size_t y = 0; y < j.cols(); ++y) {
    thresholds.clear();
    for (std::size_t x = 0; x < j.rows(); ++x) {
      if (px[x] < kZeroProb) continue;
      thresholds.emplace_back(std::min(j(x, y) / px[x], 1.0), px[x]);
    }
    std::sort(thresholds.begin(), thresholds.end());
    // F is constant on (prev, t] and equals the mass with threshold >= t.
    double remaining = 0.0;
    for (const auto& [t, m] : thresholds) remaining += m;
    double prev = 0.0;
    for (std::size_t k = 0; k < thresholds.size();) {
      const double t = thresholds[k].first;
      const double f = std::min(remaining, 1.0);
      total -= (t - prev) * neg_xlogx(f);
      while (k < thresholds.size() && thresholds[k].first == t) {
        remaining -= thresholds[k].second;
        ++k;
      }
      prev = t;
    }
  }
  return std::min(total, 0.0);
}

double excess_integral(const Component& c) { return excess_integral(c.joint); }

double deterministic_exact(const Problem& p, const ProblemStats& stats) {
  if (!stats.deterministic) {
    throw Error(ErrorCode::kRegime,
                "exact value needs every H(X_i|Y_i) = 0");
  }
  require_nontrivial(stats);
  double v = 0.0;
  for (const auto& c : stats.components) v += c.mu * c.h_y_given_x;
  return v + split_value(frl_coefficients(stats, 0), p.epsilon).first;
}

BoundsReport perfect_privacy_bounds(const Problem& p,
                                    const ProblemStats& stats) {
  if (p.epsilon != 0.0) {
    throw Error(ErrorCode::kRegime, "perfect privacy bounds need epsilon = 0");
  }
  BoundsReport r;
  r.perfect_privacy = true;
  r.deterministic = stats.deterministic;
  r.trivial = stats.trivial;
  r.perfect = perfect_block(p, stats);
  r.upper = r.perfect->upper;
  r.upper_closed_form = upper_base(stats);
  r.lower_frl = r.lower_frl_closed_form = frl_base(stats);
  r.lower_sfrl = r.lower_sfrl_closed_form = sfrl_base(stats);
  r.lower = std::max({0.0, r.lower_frl, r.lower_sfrl});
  r.gap = r.upper_closed_form - r.lower_frl;
  r.beta = beta_terms(stats, std::vector<double>(stats.components.size(), 0.0));
  return r;
}

BoundsReport compute_bounds(const Problem& p, const ProblemStats& stats) {
  BoundsReport r;
  r.epsilon = p.epsilon;
  r.trivial = stats.trivial;
  r.deterministic = stats.deterministic;
  r.perfect_privacy = p.epsilon == 0.0;
  if (stats.trivial) {
    const double v = trivial_optimum(p, stats);
    r.trivial_value = v;
    r.upper = r.lower = r.lower_frl = r.lower_sfrl = v;
    r.upper_closed_form = r.lower_frl_closed_form = r.lower_sfrl_closed_form = v;
    return r;
  }
  const auto [mu_split, mu_closed] =
      split_value(frl_coefficients(stats, 0), p.epsilon);
  const auto [g_split, g_closed] =
      split_value(esfrl_coefficients(stats, 0), p.epsilon);
  r.upper = upper_base(stats) + mu_split;
  r.lower_frl = frl_base(stats) + mu_split;
  r.lower_sfrl = sfrl_base(stats) + g_split;
  r.lower = std::max({0.0, r.lower_frl, r.lower_sfrl});
  r.gap = gap_identity(p, stats);
  r.upper_closed_form = upper_base(stats) + mu_closed;
  r.lower_frl_closed_form = frl_base(stats) + mu_closed;
  r.lower_sfrl_closed_form = sfrl_base(stats) + g_closed;
  r.closed_form = std::abs(mu_split - mu_closed) <= kClosedFormTolerance &&
                  std::abs(g_split - g_closed) <= kClosedFormTolerance;

  const auto exact_split = fill(esfrl_coefficients(stats, 0), p.epsilon);
  r.beta = beta_terms(stats, exact_split);
  if (std::any_of(stats.components.begin(), stats.components.end(),
                  [](const auto& c) { return c.gamma.has_value(); })) {
    r.esfrl_allocation = allocate_epsilon(p, stats, AllocationVariant::kEsfrl);
  }
  if (r.perfect_privacy) r.perfect = perfect_block(p, stats);
  if (stats.deterministic) r.deterministic_value = deterministic_exact(p, stats);
  return r;
}

}  // namespace privbound
