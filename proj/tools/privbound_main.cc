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

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "privbound/commands.h"

int main(int argc, char** argv) {
  CLI::App app{"Bounds, mechanisms and search for the multi-user privacy-utility trade-off"};
  app.require_subcommand(1);

  std::string problem, mech_out, variant = "frl", mech_in, eps_spec, csv_path;
  bool decompose = false;
  privbound::OracleFlags oflags;
  std::optional<std::size_t> card_u;

  auto* bounds = app.add_subcommand("bounds", "Print upper and lower bounds as JSON");
  bounds->add_option("file", problem, "Problem file")->required();

  auto* mechanize = app.add_subcommand("mechanize", "Build the composed mechanism");
  mechanize->add_option("file", problem, "Problem file")->required();
  mechanize->add_option("--out", mech_out, "Where to write the mechanism")->required();
  mechanize->add_option("--variant", variant, "Budget allocation: frl or esfrl")
      ->check(CLI::IsMember({"frl", "esfrl"}));

  auto* verify = app.add_subcommand("verify", "Evaluate a mechanism against a problem");
  verify->add_option("file", problem, "Problem file")->required();
  verify->add_option("mechanism", mech_in, "Mechanism file")->required();
  verify->add_flag("--decompose", decompose, "Run the per-component decomposition checks");

  auto* oracle = app.add_subcommand("oracle", "Search for good mechanisms and compare with the bounds");
  oracle->add_option("file", problem, "Problem file")->required();
  oracle->add_option("--seed", oflags.seed, "Random seed");
  oracle->add_option("--restarts", oflags.restarts, "Random restarts")->check(CLI::PositiveNumber);
  oracle->add_option("--card-u", card_u, "Alphabet size of U for random restarts");

  auto* sweep = app.add_subcommand("sweep", "Tabulate bounds over an epsilon grid");
  sweep->add_option("file", problem, "Problem file")->required();
  sweep->add_option("--eps", eps_spec, "Grid as from:to:step (nats)")->required();
  sweep->add_option("--csv", csv_path, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : privbound::kExitSchema;
  }

  if (*bounds) return privbound::run_bounds(problem, std::cout, std::cerr);
  if (*mechanize) {
    return privbound::run_mechanize(problem, mech_out, variant, std::cout, std::cerr);
  }
  if (*verify) return privbound::run_verify(problem, mech_in, decompose, std::cout, std::cerr);
  if (*oracle) {
    oflags.card_u = card_u;
    return privbound::run_oracle(problem, oflags, std::cout, std::cerr);
  }
  return privbound::run_sweep(problem, eps_spec, csv_path, std::cout, std::cerr);
}
