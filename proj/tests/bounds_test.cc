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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "privbound/errors.h"
#include "test_support.h"

namespace privbound {
namespace {

using testing::Matrix;
using testing::Rng;

constexpr double kLn2 = std::numbers::ln2;
const Matrix kCopy = {{0.5, 0.0}, {0.0, 0.5}};

Problem make(std::vector<Matrix> comps, std::vector<User> users, double eps) {
  Problem p;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    p.components.push_back(make_component("c" + std::to_string(i), comps[i]));
  }
  p.users = std::move(users);
  p.epsilon = eps;
  return p;
}

Matrix independent(const std::vector<double>& px, const std::vector<double>& py) {
  Matrix m(px.size(), std::vector<double>(py.size()));
  for (std::size_t x = 0; x < px.size(); ++x) {
    for (std::size_t y = 0; y < py.size(); ++y) m[x][y] = px[x] * py[y];
  }
  return m;
}

// Riemann-sum reference for sum_y int_0^1 F_y(t) ln F_y(t) dt.
double ref_excess(const Matrix& m, int steps) {
  std::vector<double> px(m.size(), 0.0);
  for (std::size_t x = 0; x < m.size(); ++x) {
    for (double v : m[x]) px[x] += v;
  }
  double total = 0;
  for (std::size_t y = 0; y < m.front().size(); ++y) {
    for (int k = 0; k < steps; ++k) {
      const double t = (k + 0.5) / steps;
      double f = 0;
      for (std::size_t x = 0; x < m.size(); ++x) {
        if (m[x][y] / px[x] >= t) f += px[x];
      }
      if (f > 0) total += f * std::log(f) / steps;
    }
  }
  return total;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::kInvalidArgument;
}

TEST(FillByCoefficient, GreedyWithCaps) {
  const std::vector<double> coef = {1.0, 3.0, 2.0};
  const std::vector<double> caps = {1.0, 0.2, 0.5};
  const auto e = fill_by_coefficient(coef, caps, 0.6);
  EXPECT_DOUBLE_EQ(e[0], 0.0);
  EXPECT_DOUBLE_EQ(e[1], 0.2);
  EXPECT_DOUBLE_EQ(e[2], 0.4);
}

TEST(Allocate, FrlArgmax) {
  const Problem p = make({kCopy, kCopy}, {User{{0}, 1.0}, User{{1}, 3.0}}, 0.1);
  const auto a = allocate_epsilon(p, validate(p), AllocationVariant::kFrl);
  EXPECT_EQ(a.eps_per_component, (std::vector<double>{0.0, 0.1}));
  EXPECT_EQ(a.overflow, 0.0);
  EXPECT_TRUE(a.saturated.empty());
}

TEST(Allocate, FrlTieBreaksToLowestIndex) {
  const Problem p = make({kCopy, kCopy}, {User{{0}, 2.0}, User{{1}, 2.0}}, 0.1);
  const auto a = allocate_epsilon(p, validate(p), AllocationVariant::kFrl);
  EXPECT_EQ(a.eps_per_component, (std::vector<double>{0.1, 0.0}));
}

TEST(Allocate, EsfrlFollowsGamma) {
  const Problem p = make({testing::bsc(0.2), testing::bsc(0.1)},
                         {User{{0}, 1.0}, User{{1}, 1.0}}, 0.1);
  const auto s = validate(p);
  // Independent gamma evaluation.
  std::vector<double> gamma;
  for (const auto& m : {testing::bsc(0.2), testing::bsc(0.1)}) {
    const double i = testing::ref_mi(m);
    const double hx = kLn2;
    const double hxy = kLn2 - i;
    gamma.push_back(1 - hxy / hx + (std::log(i + 1) + 4) / hx);
  }
  ASSERT_LT(gamma[0], gamma[1]);
  EXPECT_NEAR(*s.components[0].gamma, gamma[0], 1e-12);
  EXPECT_NEAR(*s.components[1].gamma, gamma[1], 1e-12);
  const auto a = allocate_epsilon(p, s, AllocationVariant::kEsfrl);
  EXPECT_EQ(a.eps_per_component, (std::vector<double>{0.0, 0.1}));
}

TEST(Allocate, EsfrlSkipsConstantX) {
  const Problem p = make({{{0.3, 0.7}}, kCopy}, {User{{0}, 5.0}, User{{1}, 1.0}}, 0.1);
  const auto a = allocate_epsilon(p, validate(p), AllocationVariant::kEsfrl);
  EXPECT_EQ(a.eps_per_component, (std::vector<double>{0.0, 0.1}));
}

TEST(Allocate, CapsAtComponentInformation) {
  // Component 0 carries little information, so its share is capped and the
  // remainder moves to the next coefficient.
  const Matrix skew = {{0.99, 0.0}, {0.0, 0.01}};
  const Problem p = make({skew, kCopy}, {User{{0}, 2.0}, User{{1}, 1.0}}, 0.5);
  const auto s = validate(p);
  const auto a = allocate_epsilon(p, s, AllocationVariant::kFrl);
  const double i0 = s.components[0].i_xy;
  EXPECT_NEAR(a.eps_per_component[0], i0 - kAllocationMargin, 1e-15);
  EXPECT_NEAR(a.eps_per_component[1], 0.5 - a.eps_per_component[0], 1e-15);
  EXPECT_LE(a.total(), p.epsilon + 1e-15);
  EXPECT_EQ(a.saturated, (std::vector<std::size_t>{0}));
  EXPECT_EQ(a.overflow, 0.0);
}

TEST(Allocate, ReportsOverflow) {
  const Matrix skew = {{0.99, 0.0}, {0.0, 0.01}};
  const Matrix weak = testing::bsc(0.3);
  const Problem p = make({skew, weak}, {User{{0, 1}, 1.0}}, 0.0);
  Problem q = p;
  const auto s0 = validate(p);
  // Just below the total, so the regime stays non-trivial while the margins
  // leave a small remainder.
  q.epsilon = s0.total_mi - 1e-13;
  const auto a = allocate_epsilon(q, validate(q), AllocationVariant::kFrl);
  EXPECT_GT(a.overflow, 0.0);
  EXPECT_EQ(a.saturated.size(), 2u);
  EXPECT_NEAR(a.total() + a.overflow, q.epsilon, 1e-15);
}

TEST(Allocate, TrivialRegimeIsAnError) {
  const Problem p = make({kCopy}, {User{{0}, 1.0}}, 1.0);
  EXPECT_EQ(code_of([&] { allocate_epsilon(p, validate(p), AllocationVariant::kFrl); }),
            ErrorCode::kRegime);
  EXPECT_EQ(code_of([&] { upper_bound(p, validate(p)); }), ErrorCode::kRegime);
  EXPECT_EQ(code_of([&] { lower_bound_frl(p, validate(p)); }), ErrorCode::kRegime);
  EXPECT_EQ(code_of([&] { lower_bound_sfrl(p, validate(p)); }), ErrorCode::kRegime);
}

TEST(UpperBound, UniformCopy) {
  const Problem p = make({kCopy}, {User{{0}, 1.0}}, 0.1);
  EXPECT_NEAR(upper_bound(p, validate(p)), 0.1 + kLn2, 1e-15);
}

TEST(UpperBound, PerfectPrivacyForm) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    Problem p = testing::random_problem(rng);
    p.epsilon = 0;
    const auto s = validate(p);
    double v = 0;
    for (const auto& c : s.components) v += c.mu * (c.h_y_given_x + c.delta);
    EXPECT_NEAR(upper_bound(p, s), v, 1e-12);
  }
}

TEST(Bounds, ZeroWeightsGiveZero) {
  const Problem p = make({kCopy, testing::bsc(0.1)}, {User{{0, 1}, 0.0}}, 0.1);
  const auto s = validate(p);
  EXPECT_EQ(upper_bound(p, s), 0.0);
  EXPECT_EQ(lower_bound_sfrl(p, s), 0.0);
  EXPECT_EQ(lower_bound_frl(p, s), 0.0);
}

TEST(LowerBoundFrl, SymmetricChannelCancels) {
  const Problem p = make({testing::bsc(0.1)}, {User{{0}, 1.0}}, 0.2);
  EXPECT_NEAR(lower_bound_frl(p, validate(p)), 0.2, 1e-14);
}

TEST(LowerBoundFrl, UniformCopy) {
  const Problem p = make({kCopy}, {User{{0}, 1.0}}, 0.3);
  EXPECT_NEAR(lower_bound_frl(p, validate(p)), 0.3, 1e-15);
}

TEST(LowerBoundFrl, DeterministicAtZero) {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    Problem p = testing::random_problem(rng, {.deterministic = true});
    p.epsilon = 0;
    const auto s = validate(p);
    if (s.trivial) continue;
    double v = 0;
    for (const auto& c : s.components) v += c.mu * c.h_y_given_x;
    EXPECT_NEAR(lower_bound_frl(p, s), v, 1e-12);
  }
}

TEST(LowerBoundSfrl, IndependentComponentClosedForm) {
  // An independent pair on its own is always in the trivial regime, so it is
  // paired with an informative component.
  const Matrix ind = independent({0.5, 0.5}, {0.25, 0.75});
  const Problem p = make({ind, kCopy}, {User{{0}, 3.0}, User{{1}, 1.0}}, 0.1);
  const auto s = validate(p);
  const double h_y = testing::ref_entropy({0.25, 0.75});
  const double gamma0 = 1 - 1 + 4 / kLn2;
  EXPECT_NEAR(*s.components[0].gamma, gamma0, 1e-12);
  const double copy_base = 1.0 * (0 - (std::log(kLn2 + 1) + 4));
  const auto r = compute_bounds(p, s);
  EXPECT_NEAR(r.lower_sfrl_closed_form, 3.0 * (h_y - 4) + copy_base + 0.1 * 3.0 * gamma0,
              1e-12);
  // The capped split cannot spend budget on a component with I = 0.
  const double gamma1 = *s.components[1].gamma;
  EXPECT_NEAR(r.lower_sfrl, 3.0 * (h_y - 4) + copy_base + 0.1 * gamma1, 1e-12);
  EXPECT_FALSE(r.closed_form);
}

TEST(LowerBoundSfrl, BetaTermsSumToBound) {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    Problem p = testing::random_problem(rng);
    const auto s0 = validate(p);
    p.epsilon = rng.uniform(0, 0.9) * s0.total_mi;
    const auto s = validate(p);
    const auto r = compute_bounds(p, s);
    double v = 0;
    for (std::size_t i = 0; i < s.components.size(); ++i) v += s.components[i].mu * r.beta[i];
    EXPECT_NEAR(v, r.lower_sfrl, 1e-12);
  }
}

TEST(GapIdentity, UniformCopy) {
  for (double eps : {0.0, 0.1, 0.5}) {
    const Problem p = make({kCopy}, {User{{0}, 1.0}}, eps);
    EXPECT_NEAR(gap_identity(p, validate(p)), kLn2, 1e-15);
  }
}

TEST(GapIdentity, LargeIndependentComponent) {
  const Matrix ind = independent(std::vector<double>(64, 1.0 / 64), {0.5, 0.5});
  const Problem p = make({ind, kCopy}, {User{{0}, 1.0}, User{{1}, 1.0}}, 0.1);
  const auto s = validate(p);
  EXPECT_NEAR(s.components[0].delta, 4.0, 1e-12);
  EXPECT_NEAR(gap_identity(p, s), 4 + std::log(64.0) + kLn2, 1e-12);
}

TEST(GapIdentity, MatchesUpperMinusLowerOnRandomProblems) {
  Rng rng(100);
  for (int t = 0; t < 100; ++t) {
    Problem p = testing::random_problem(rng);
    p.epsilon = rng.uniform(0, 0.9) * validate(p).total_mi;
    const auto s = validate(p);
    EXPECT_NEAR(gap_identity(p, s), upper_bound(p, s) - lower_bound_frl(p, s), 1e-9);
  }
}

TEST(Bounds, SandwichAndMonotonicity) {
  Rng rng(200);
  for (int t = 0; t < 50; ++t) {
    Problem p = testing::random_problem(rng);
    const double total = validate(p).total_mi;
    double prev_upper = -1, prev_l1 = -1;
    for (double f : {0.0, 0.2, 0.4, 0.6, 0.8}) {
      p.epsilon = f * total;
      const auto r = compute_bounds(p, validate(p));
      EXPECT_LE(r.lower, r.upper + 1e-9);
      EXPECT_GE(r.upper, prev_upper - 1e-12);
      EXPECT_GE(r.lower_frl, prev_l1 - 1e-12);
      prev_upper = r.upper;
      prev_l1 = r.lower_frl;
    }
  }
}

TEST(Bounds, AffineWithSlopeMaxMuBelowCaps) {
  const Problem base = make({kCopy, testing::bsc(0.1)},
                            {User{{0}, 1.0}, User{{0, 1}, 2.0}}, 0.0);
  auto at = [&](double eps) {
    Problem p = base;
    p.epsilon = eps;
    return compute_bounds(p, validate(p));
  };
  const auto a = at(0.1), b = at(0.3);
  EXPECT_NEAR((b.upper - a.upper) / 0.2, 3.0, 1e-12);
  EXPECT_NEAR((b.lower_frl - a.lower_frl) / 0.2, 3.0, 1e-12);
  EXPECT_TRUE(a.closed_form);
  EXPECT_NEAR(a.upper, a.upper_closed_form, 1e-12);
}

TEST(Bounds, ScaleWithWeights) {
  Rng rng(300);
  for (int t = 0; t < 20; ++t) {
    Problem p = testing::random_problem(rng);
    p.epsilon = 0.5 * validate(p).total_mi;
    Problem q = p;
    for (auto& u : q.users) u.weight *= 2.5;
    const auto a = compute_bounds(p, validate(p));
    const auto b = compute_bounds(q, validate(q));
    EXPECT_NEAR(b.upper, 2.5 * a.upper, 1e-12);
    EXPECT_NEAR(b.lower_frl, 2.5 * a.lower_frl, 1e-12);
    EXPECT_NEAR(b.lower_sfrl, 2.5 * a.lower_sfrl, 1e-11);
    EXPECT_NEAR(b.gap, 2.5 * a.gap, 1e-12);
  }
}

TEST(Bounds, CappedSplitStaysBelowTrivialOptimum) {
  // The closed form spends the whole budget at coefficient 2 on a component
  // that can only leak I(X;Y) ~ 0.056, which overshoots the best possible
  // utility.
  const Matrix skew = {{0.99, 0.0}, {0.0, 0.01}};
  const Problem p = make({skew, kCopy}, {User{{0}, 2.0}, User{{1}, 1.0}}, 0.5);
  const auto s = validate(p);
  const auto r = compute_bounds(p, s);
  const double best = 2 * testing::ref_entropy({0.99, 0.01}) + kLn2;
  EXPECT_GT(r.lower_frl_closed_form, best);
  EXPECT_LE(r.lower, best + 1e-12);
  EXPECT_FALSE(r.closed_form);
  EXPECT_NEAR(r.upper - r.lower_frl, r.gap, 1e-12);
}

TEST(ExcessIntegral, DeterministicEqualsMinusInformation) {
  Rng rng(9);
  for (int t = 0; t < 30; ++t) {
    const Matrix m = testing::random_deterministic(rng, rng.between(1, 3), rng.between(3, 5));
    EXPECT_NEAR(excess_integral(make_component("c", m)), -testing::ref_mi(m), 1e-12);
  }
}

TEST(ExcessIntegral, SymmetricChannel) {
  // -(1 - 2 theta) ln 2 at theta = 0.1.
  EXPECT_NEAR(excess_integral(make_component("c", testing::bsc(0.1))), -0.8 * kLn2, 1e-14);
}

TEST(ExcessIntegral, ConstantX) {
  EXPECT_EQ(excess_integral(make_component("c", {{0.2, 0.3, 0.5}})), 0.0);
}

TEST(ExcessIntegral, MatchesRiemannSum) {
  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    const Matrix m = testing::random_joint(rng, 3, 3);
    const double v = excess_integral(make_component("c", m));
    EXPECT_LE(v, 0.0);
    EXPECT_NEAR(v, ref_excess(m, 200000), 1e-4);
  }
}

TEST(PerfectPrivacy, SymmetricChannel) {
  const Problem p = make({testing::bsc(0.1)}, {User{{0}, 1.0}}, 0.0);
  const auto r = perfect_privacy_bounds(p, validate(p));
  ASSERT_TRUE(r.perfect.has_value());
  EXPECT_NEAR(r.perfect->u0_second[0], 0.2 * kLn2, 1e-14);
  EXPECT_NEAR(r.perfect->u0_first[0], testing::ref_entropy({0.1, 0.9}), 1e-14);
  EXPECT_LT(r.perfect->u0_second[0], r.perfect->u0_first[0]);
  const auto& c = validate(p).components[0];
  EXPECT_NEAR(r.upper, 0.2 * kLn2 + c.delta, 1e-14);
}

TEST(PerfectPrivacy, DeterministicCoincide) {
  const Matrix parity = {{0.25, 0.0, 0.25, 0.0}, {0.0, 0.25, 0.0, 0.25}};
  const Problem p = make({parity}, {User{{0}, 1.0}}, 0.0);
  const auto r = perfect_privacy_bounds(p, validate(p));
  EXPECT_NEAR(r.perfect->u0_first[0], kLn2, 1e-14);
  EXPECT_NEAR(r.perfect->u0_second[0], kLn2, 1e-14);
}

TEST(PerfectPrivacy, IndependentPair) {
  const Matrix ind = independent({0.5, 0.5}, {0.25, 0.75});
  const Problem p = make({ind}, {User{{0}, 1.0}}, 0.0);
  const auto r = perfect_privacy_bounds(p, validate(p));
  EXPECT_NEAR(r.lower_frl, testing::ref_entropy({0.25, 0.75}) - kLn2, 1e-14);
}

TEST(PerfectPrivacy, RequiresZeroEpsilon) {
  const Problem p = make({kCopy}, {User{{0}, 1.0}}, 0.1);
  EXPECT_EQ(code_of([&] { perfect_privacy_bounds(p, validate(p)); }), ErrorCode::kRegime);
}

TEST(PerfectPrivacy, ComputeBoundsAttachesBlock) {
  const Problem p = make({testing::bsc(0.1), kCopy}, {User{{0, 1}, 1.0}}, 0.0);
  const auto s = validate(p);
  const auto r = compute_bounds(p, s);
  ASSERT_TRUE(r.perfect.has_value());
  EXPECT_TRUE(r.perfect_privacy);
  EXPECT_LE(r.perfect->upper, r.upper + 1e-15);
  EXPECT_NEAR(r.upper - r.lower_frl, gap_identity(p, s), 1e-12);
}

TEST(DeterministicExact, UniformCopy) {
  const Problem p = make({kCopy}, {User{{0}, 1.0}}, 0.1);
  const auto s = validate(p);
  EXPECT_NEAR(deterministic_exact(p, s), 0.1, 1e-15);
}

TEST(DeterministicExact, ParityAtZero) {
  const Matrix parity = {{0.25, 0.0, 0.25, 0.0}, {0.0, 0.25, 0.0, 0.25}};
  const Problem p = make({parity}, {User{{0}, 1.0}}, 0.0);
  EXPECT_NEAR(deterministic_exact(p, validate(p)), kLn2, 1e-15);
}

TEST(DeterministicExact, EqualsLowerFrlAndDominatesSfrl) {
  Rng rng(40);
  for (int t = 0; t < 50; ++t) {
    Problem p = testing::random_problem(rng, {.deterministic = true});
    const double total = validate(p).total_mi;
    if (total <= 0) continue;
    p.epsilon = rng.uniform(0, 0.9) * total;
    const auto s = validate(p);
    const auto r = compute_bounds(p, s);
    ASSERT_TRUE(r.deterministic_value.has_value());
    EXPECT_NEAR(*r.deterministic_value, r.lower_frl, 1e-12);
    EXPECT_GE(r.lower_frl, r.lower_sfrl - 1e-12);
  }
}

TEST(DeterministicExact, RejectsNoisyComponents) {
  const Problem p = make({testing::bsc(0.1)}, {User{{0}, 1.0}}, 0.1);
  EXPECT_EQ(code_of([&] { deterministic_exact(p, validate(p)); }), ErrorCode::kRegime);
}

TEST(ComputeBounds, TrivialRegime) {
  const Problem p = make({kCopy, testing::bsc(0.1)}, {User{{0, 1}, 2.0}}, 5.0);
  const auto r = compute_bounds(p, validate(p));
  ASSERT_TRUE(r.trivial_value.has_value());
  EXPECT_NEAR(*r.trivial_value, 4 * kLn2, 1e-14);
}

}  // namespace
}  // namespace privbound
