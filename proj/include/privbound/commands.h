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

// Command implementations behind the privbound executable. Each returns the
// process exit code and writes its report to `out`, diagnostics to `err`.

#ifndef PRIVBOUND_COMMANDS_H_
#define PRIVBOUND_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "privbound/errors.h"

namespace privbound {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,       // a requested check did not hold
  kExitSchema = 2,        // malformed input or arguments
  kExitInvariant = 3,     // invariant or regime violation
  kExitAlphabet = 4,      // mechanism does not fit the problem
  kExitSizeCap = 5,       // tensor would exceed PRIVBOUND_SIZE_CAP
};

int exit_code_for(ErrorCode code);

int run_bounds(const std::string& problem_path, std::ostream& out, std::ostream& err);

int run_mechanize(const std::string& problem_path, const std::string& out_path,
                  const std::string& variant, std::ostream& out, std::ostream& err);

int run_verify(const std::string& problem_path, const std::string& mechanism_path,
               bool decompose, std::ostream& out, std::ostream& err);

struct OracleFlags {
  std::uint64_t seed = 0;
  std::size_t restarts = 8;
  std::optional<std::size_t> card_u;
};

int run_oracle(const std::string& problem_path, const OracleFlags& flags,
               std::ostream& out, std::ostream& err);

struct EpsGrid {
  double from = 0, to = 0, step = 0;
};

// Parses "from:to:step"; throws kSchema.
EpsGrid parse_eps_grid(const std::string& text);

int run_sweep(const std::string& problem_path, const std::string& eps_spec,
              const std::string& csv_path, std::ostream& out, std::ostream& err);

}  // namespace privbound

#endif  // PRIVBOUND_COMMANDS_H_
