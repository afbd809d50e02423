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

// Disclosure mechanisms: the interval-refinement functional representation,
// its randomized extension with exact leakage, multi-user composition, and
// the decomposition transforms that turn an arbitrary mechanism into a
// per-component one.

#ifndef PRIVBOUND_MECHANISMS_H_
#define PRIVBOUND_MECHANISMS_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "privbound/bounds.h"
#include "privbound/model.h"
#include "privbound/probcore.h"

namespace privbound {

// Cut points of the common refinement closer than this are merged.
inline constexpr double kEndpointMerge = 1e-12;
inline constexpr double kKernelTolerance = 1e-9;

// Conditional law P(u | x, y), stored at (x * y_size + y) * u_size + u.
class Kernel {
 public:
  Kernel() = default;
  // Checks that every (x, y) slice is a distribution within
  // kKernelTolerance and renormalizes it.
  Kernel(std::size_t x_size, std::size_t y_size, std::size_t u_size,
         std::vector<double> table);

  std::size_t x_size() const { return x_size_; }
  std::size_t y_size() const { return y_size_; }
  std::size_t u_size() const { return u_size_; }
  std::span<const double> table() const { return table_; }

  double operator()(std::size_t x, std::size_t y, std::size_t u) const {
    return table_[(x * y_size_ + y) * u_size_ + u];
  }
  std::span<const double> column(std::size_t x, std::size_t y) const {
    return std::span<const double>(table_).subspan((x * y_size_ + y) * u_size_,
                                                   u_size_);
  }

 private:
  std::size_t x_size_ = 0;
  std::size_t y_size_ = 0;
  std::size_t u_size_ = 0;
  std::vector<double> table_;
};

// P(col | row); used for the auxiliary variables that only see X_i.
struct Channel {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> table;

  double operator()(std::size_t r, std::size_t c) const {
    return table[r * cols + c];
  }
};

// Functional representation by interval refinement. For every x with
// P(x) > 0, [0,1) is cut into consecutive pieces of length P(y|x) in y
// order; U indexes the cells of the common refinement of these partitions
// and P(u|x,y) = |cell_u| / P(y|x) for the cells inside piece (x,y).
// Then U is independent of X, Y is a function of (U,X), and
// |U| <= |X|(|Y|-1)+1. Rows with zero mass get a point mass on cell 0.
Kernel frl_kernel(const Joint2& j);
Kernel frl_construct(const Component& c);

// U = (U_frl, W) with W = X with probability eps_i / H(X) and a dedicated
// extra symbol otherwise; I(X;U) = eps_i exactly. Symbol index is
// u_frl * (|X| + 1) + w. Requires 0 <= eps_i < I(X;Y).
Kernel efrl_construct(const Component& c, double eps_i);

Kernel identity_kernel(std::size_t x_size, std::size_t y_size);  // U = Y
Kernel constant_kernel(std::size_t x_size, std::size_t y_size);  // |U| = 1

enum class Construction { kFrl, kEfrl, kIdentity, kConstant, kTransformed };

std::string_view construction_name(Construction c);
Construction construction_from_name(std::string_view name);

struct ComponentMechanism {
  Construction tag = Construction::kFrl;
  double eps = 0;
  Kernel kernel;  // over (x_i, y_i) of the pruned component
};

// U = (U_1, ..., U_N), each U_i drawn from its own kernel given (X_i, Y_i).
struct ComposedMechanism {
  std::vector<ComponentMechanism> parts;
  Allocation allocation;
};

// eps_i > 0 gets efrl_construct(eps_i); every other component frl_construct.
ComposedMechanism compose_multiuser(const Problem& p, const Allocation& alloc);

struct MechanismReport {
  double leakage = 0;                   // I(X;U)
  std::vector<double> utilities;        // I(C_j;U) per user
  double objective = 0;                 // sum_j lambda_j I(C_j;U)
  double residual_y_given_xu = 0;       // H(Y|X,U)
  double cardinality = 0;               // |U|
  std::vector<double> component_leakage;  // I(X_i;U), composed form only
  std::vector<double> component_utility;  // I(Y_i;U_i), composed form only
};

// Per-component evaluation summed under independence; never materializes
// the product alphabet.
MechanismReport evaluate(const Problem& p, const ComposedMechanism& m);
// Monolithic kernel over the flattened (x, y) alphabets; goes through JointN.
MechanismReport evaluate(const Problem& p, const Kernel& m);

// Flattened alphabet sizes prod_i |X_i| and prod_i |Y_i|. Flat indices are
// mixed-radix with component 0 most significant.
std::size_t joint_x_size(const Problem& p);
std::size_t joint_y_size(const Problem& p);

// P(x, y) over the flattened alphabets.
std::vector<double> source_law(const Problem& p);

// JointN with axes (X_1..X_N, Y_1..Y_N, U).
JointN full_joint(const Problem& p, const Kernel& m);

// Monolithic kernel equivalent to the composed mechanism.
Kernel materialize(const Problem& p, const ComposedMechanism& m);

// Checks that kernel alphabets fit the problem; throws kAlphabetMismatch.
void check_alphabets(const Problem& p, const Kernel& m);
void check_alphabets(const Problem& p, const ComposedMechanism& m);

struct Decomposition {
  // P(ubar_i | x_i); ubar_i ranges over X_1 x ... x X_{i-1} x U, flattened
  // mixed-radix with u fastest.
  std::vector<Channel> ubar;
  double leakage_u = 0;     // I(X;U)
  double leakage_ubar = 0;  // I(X;Ubar)
  double markov_residual = 0;        // I(Ubar; Y,U | X)
  double independence_residual = 0;  // total correlation of (Ubar_i,Y_i,X_i)
};

// Builds Ubar with P(ubar_i|x_i) = P(x_1..x_{i-1}, u | x_i) and the joint
// P(x,y,u) prod_i P(ubar_i|x_i), then measures the properties it should
// have: equal leakage, the Markov chain Ubar - X - (Y,U) and independence
// of the (Ubar_i, Y_i, X_i) across i.
Decomposition decompose_transform(const Problem& p, const Kernel& m);

struct TransformCheck {
  Decomposition decomposition;
  // U*_i = (Utilde_i, Ubar_i) with Utilde_i the functional representation of
  // Y_i given (Ubar_i, X_i); index utilde * |Ubar_i| + ubar.
  ComposedMechanism ustar;
  double leakage_u = 0;
  double leakage_ustar = 0;
  std::vector<double> utility_u;      // I(C_j;U)
  std::vector<double> utility_ustar;  // I(C_j;U*)
  std::vector<double> slack;          // sum_{i in C_j} s1_i
  bool leakage_preserved = false;
  bool utility_bounded = false;
};

TransformCheck theorem1_transform(const Problem& p, const Kernel& m);

}  // namespace privbound

#endif  // PRIVBOUND_MECHANISMS_H_
