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

// JSON problem and mechanism files, and report documents.
//
// Problem file (schema "privbound/1"):
//   {"schema": "privbound/1",
//    "components": [{"name": "a", "matrix": [[0.4, 0.1], [0.1, 0.4]],
//                    "labels": {"x": ["0", "1"], "y": ["0", "1"]}}],
//    "users": [{"demands": [0], "weight": 1.0}],
//    "epsilon": 0.1,
//    "options": {"log_display": "nats", "sfrl_constant": 4}}
// "labels" and "options" are optional. Kernels in mechanism files are
// indexed by the component alphabets after zero-probability symbols are
// dropped.

#ifndef PRIVBOUND_IO_H_
#define PRIVBOUND_IO_H_

#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"
#include "privbound/bounds.h"
#include "privbound/mechanisms.h"
#include "privbound/model.h"
#include "privbound/oracle.h"

namespace privbound {

inline constexpr std::string_view kProblemSchema = "privbound/1";
inline constexpr std::string_view kMechanismSchema = "privbound-mechanism/1";

// Throws kSchema with a line/column or field-path diagnostic, or the
// error of make_component for bad probability masses.
Problem parse_problem(std::string_view text);
Problem load_problem(const std::string& path);
nlohmann::json problem_to_json(const Problem& p);

using Mechanism = std::variant<ComposedMechanism, Kernel>;

nlohmann::json mechanism_to_json(const ComposedMechanism& m);
nlohmann::json mechanism_to_json(const Kernel& m);
Mechanism parse_mechanism(std::string_view text);
Mechanism load_mechanism(const std::string& path);

// Report documents. Values are converted to bits only here when the
// problem asks for it.
nlohmann::json stats_to_json(const Problem& p, const ProblemStats& s,
                             DisplayUnit unit);
nlohmann::json bounds_to_json(const Problem& p, const BoundsReport& r,
                              const ProblemStats& s, DisplayUnit unit);
nlohmann::json mechanism_report_to_json(const MechanismReport& r,
                                        DisplayUnit unit);
nlohmann::json decomposition_to_json(const Decomposition& d, DisplayUnit unit);
nlohmann::json transform_to_json(const TransformCheck& c, DisplayUnit unit);
nlohmann::json sandwich_to_json(const SandwichReport& r, DisplayUnit unit);
nlohmann::json allocation_to_json(const Allocation& a, DisplayUnit unit);

std::string_view unit_name(DisplayUnit u);
double to_display(double nats, DisplayUnit u);

}  // namespace privbound

#endif  // PRIVBOUND_IO_H_
