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

// Randomized local search for good feasible mechanisms on tiny instances.
// Results are achieved values, i.e. lower estimates of the optimum.

#ifndef PRIVBOUND_ORACLE_H_
#define PRIVBOUND_ORACLE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "privbound/bounds.h"
#include "privbound/mechanisms.h"
#include "privbound/model.h"

namespace privbound {

// Leakage slack tolerated inside the search; results are re-evaluated from
// scratch and must satisfy I(X;U) <= eps + kFeasibilityTolerance.
inline constexpr double kSearchFeasibility = 1e-14;
inline constexpr double kFeasibilityTolerance = 1e-9;

struct OracleConfig {
  std::size_t card_u = 0;  // 0: |X|(|Y|-1)+2 over the flattened alphabets
  std::size_t restarts = 8;
  std::size_t iters = 200;  // sweeps per restart
  std::uint64_t seed = 0;
  double tolerance = 1e-11;  // stop after two sweeps gaining less than this
  // Extra starting points, run before the random restarts. Each keeps its
  // own |U|.
  std::vector<Kernel> warm_starts;
  std::optional<std::size_t> warm_iters;  // sweeps for warm starts; default iters
  // Also start from U = Y pulled back onto the constraint.
  bool identity_start = true;
  std::size_t threads = 1;
};

std::size_t default_card_u(const Problem& p);

struct OracleResult {
  double best_objective = 0;
  Kernel best_kernel;
  double leakage_at_best = 0;
  std::vector<double> trace;  // best objective of each restart, in order
  std::size_t best_restart = 0;
};

// Throws kInvalidArgument for eps < 0 or an invalid config and kSizeCap
// when a kernel would not fit.
OracleResult search(const Problem& p, const OracleConfig& cfg);

// Returns m when I(X;U) <= eps, else (1-t) m + t * (U constant at symbol 0)
// with t found by bisection so that I(X;U) lands in [eps - 1e-9, eps].
Kernel leakage_project(const Kernel& m, const Problem& p, double eps);

struct SandwichReport {
  bool trivial = false;
  bool deterministic = false;
  double lower = 0;  // max(0, lower_frl, lower_sfrl)
  double lower_frl = 0;
  double lower_sfrl = 0;
  double mechanism = 0;  // objective of the composed mechanism
  double mechanism_leakage = 0;
  double oracle = 0;
  double oracle_leakage = 0;
  double upper = 0;
  std::optional<double> exact;  // deterministic or trivial regime value
  bool lower_le_mechanism = false;
  bool mechanism_le_upper = false;
  bool mechanism_le_oracle = false;  // within kSandwichSlack
  bool oracle_le_upper = false;
  bool holds() const {
    return lower_le_mechanism && mechanism_le_upper && mechanism_le_oracle &&
           oracle_le_upper;
  }
  OracleResult search;
};

inline constexpr double kSandwichSlack = 1e-6;

// Builds the composed mechanism for p, hands it to search as a warm start
// (when it fits the size cap) and compares all four numbers.
SandwichReport sandwich_check(const Problem& p, const OracleConfig& cfg);

}  // namespace privbound

#endif  // PRIVBOUND_ORACLE_H_
