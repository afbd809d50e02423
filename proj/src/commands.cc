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

#include "privbound/commands.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <thread>
#include <vector>

#include "privbound/bounds.h"
#include "privbound/io.h"
#include "privbound/mechanisms.h"
#include "privbound/model.h"
#include "privbound/oracle.h"

namespace privbound {
namespace {

using nlohmann::json;

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
  f << body;
  if (!f) throw Error(ErrorCode::kInvalidArgument, "failed writing " + path);
}

ComposedMechanism identity_mechanism(const Problem& p) {
  ComposedMechanism m;
  for (const auto& c : p.components) {
    m.parts.push_back({Construction::kIdentity, 0.0, identity_kernel(c.x_size(), c.y_size())});
  }
  m.allocation.eps_per_component.assign(p.components.size(), 0.0);
  m.allocation.requested = p.epsilon;
  return m;
}

struct SweepRow {
  double epsilon, upper, lower_frl, lower_sfrl, lower, mech;
};

SweepRow sweep_point(Problem p, double eps) {
  p.epsilon = eps;
  const ProblemStats stats = validate(p);
  const BoundsReport b = compute_bounds(p, stats);
  SweepRow row{eps, b.upper, b.lower_frl, b.lower_sfrl, b.lower, 0.0};
  if (b.trivial) {
    row.mech = evaluate(p, identity_mechanism(p)).objective;
  } else {
    row.mech = evaluate(p, compose_multiuser(
                               p, allocate_epsilon(p, stats, AllocationVariant::kFrl)))
                   .objective;
  }
  return row;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSchema:
    case ErrorCode::kInvalidArgument:
      return kExitSchema;
    case ErrorCode::kInvariant:
    case ErrorCode::kRegime:
      return kExitInvariant;
    case ErrorCode::kAlphabetMismatch:
      return kExitAlphabet;
    case ErrorCode::kSizeCap:
      return kExitSizeCap;
  }
  return kExitFailure;
}

int run_bounds(const std::string& problem_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Problem p = load_problem(problem_path);
    const ProblemStats stats = validate(p);
    const BoundsReport r = compute_bounds(p, stats);
    json doc = bounds_to_json(p, r, stats, p.options.display);
    if (!r.trivial) {
      doc["allocation"] = allocation_to_json(
          allocate_epsilon(p, stats, AllocationVariant::kFrl), p.options.display);
    }
    out << doc.dump(2) << "\n";
    return int{kExitOk};
  });
}

int run_mechanize(const std::string& problem_path, const std::string& out_path,
                  const std::string& variant, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    AllocationVariant v;
    if (variant == "frl") {
      v = AllocationVariant::kFrl;
    } else if (variant == "esfrl") {
      v = AllocationVariant::kEsfrl;
    } else {
      throw Error(ErrorCode::kSchema, "--variant must be frl or esfrl");
    }
    const Problem p = load_problem(problem_path);
    const ProblemStats stats = validate(p);
    if (stats.trivial) {
      throw Error(ErrorCode::kRegime,
                  "epsilon >= sum of I(X_i;Y_i): releasing U = Y is optimal, nothing to construct");
    }
    const ComposedMechanism m = compose_multiuser(p, allocate_epsilon(p, stats, v));
    write_file(out_path, mechanism_to_json(m).dump(2) + "\n");
    const MechanismReport rep = evaluate(p, m);
    const bool exact = std::abs(rep.leakage - p.epsilon) <= kFeasibilityTolerance;
    json doc = {{"variant", variant},
                {"mechanism_file", out_path},
                {"allocation", allocation_to_json(m.allocation, p.options.display)},
                {"report", mechanism_report_to_json(rep, p.options.display)},
                {"leakage_equals_epsilon", exact}};
    out << doc.dump(2) << "\n";
    if (!exact) {
      err << "error: leakage " << rep.leakage << " differs from epsilon " << p.epsilon
          << " (budget overflow " << m.allocation.overflow << ")\n";
      return int{kExitInvariant};
    }
    return int{kExitOk};
  });
}

int run_verify(const std::string& problem_path, const std::string& mechanism_path,
               bool decompose, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Problem p = load_problem(problem_path);
    validate(p);
    const Mechanism mech = load_mechanism(mechanism_path);
    const DisplayUnit unit = p.options.display;
    MechanismReport rep;
    std::string kind;
    if (const auto* c = std::get_if<ComposedMechanism>(&mech)) {
      kind = "composed";
      rep = evaluate(p, *c);
    } else {
      kind = "monolithic";
      rep = evaluate(p, std::get<Kernel>(mech));
    }
    const bool feasible = rep.leakage <= p.epsilon + kFeasibilityTolerance;
    json doc = {{"kind", kind},
                {"report", mechanism_report_to_json(rep, unit)},
                {"feasible", feasible}};
    bool ok = feasible;
    if (decompose) {
      const Kernel k = std::holds_alternative<Kernel>(mech)
                           ? std::get<Kernel>(mech)
                           : materialize(p, std::get<ComposedMechanism>(mech));
      const TransformCheck t = theorem1_transform(p, k);
      const Decomposition& d = t.decomposition;
      doc["decomposition"] = decomposition_to_json(d, unit);
      doc["utility_transform"] = transform_to_json(t, unit);
      ok = ok && std::abs(d.leakage_u - d.leakage_ubar) <= 1e-9 &&
           d.markov_residual <= 1e-9 && d.independence_residual <= 1e-9 &&
           t.leakage_preserved && t.utility_bounded;
    }
    out << doc.dump(2) << "\n";
    return ok ? int{kExitOk} : int{kExitFailure};
  });
}

int run_oracle(const std::string& problem_path, const OracleFlags& flags,
               std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Problem p = load_problem(problem_path);
    validate(p);
    OracleConfig cfg;
    cfg.seed = flags.seed;
    cfg.restarts = flags.restarts;
    if (flags.card_u) {
      if (*flags.card_u < 1) throw Error(ErrorCode::kSchema, "--card-u must be >= 1");
      cfg.card_u = *flags.card_u;
    }
    const SandwichReport r = sandwich_check(p, cfg);
    const DisplayUnit unit = p.options.display;
    const auto row = [&](const char* name, double v) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%-18s %.12g\n", name, to_display(v, unit));
      out << buf;
    };
    out << "quantity           value (" << unit_name(unit) << ")\n";
    row("lower", r.lower);
    row("lower_frl", r.lower_frl);
    row("lower_sfrl", r.lower_sfrl);
    row("mechanism", r.mechanism);
    row("oracle", r.oracle);
    row("upper", r.upper);
    if (r.exact) row("exact", *r.exact);
    row("oracle_leakage", r.oracle_leakage);
    const auto yn = [](bool b) { return b ? "yes" : "NO"; };
    out << "lower <= mechanism           " << yn(r.lower_le_mechanism) << "\n"
        << "mechanism <= upper           " << yn(r.mechanism_le_upper) << "\n"
        << "mechanism <= oracle + 1e-6   " << yn(r.mechanism_le_oracle) << "\n"
        << "oracle <= upper              " << yn(r.oracle_le_upper) << "\n"
        << "seed " << cfg.seed << ", restarts " << cfg.restarts << ", |U| "
        << (cfg.card_u ? cfg.card_u : default_card_u(p)) << ", best start "
        << r.search.best_restart << "\n";
    return r.holds() ? int{kExitOk} : int{kExitFailure};
  });
}

EpsGrid parse_eps_grid(const std::string& text) {
  EpsGrid g;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &g.from, &g.to, &g.step, &tail) != 3) {
    throw Error(ErrorCode::kSchema, "--eps expects from:to:step, got '" + text + "'");
  }
  if (!std::isfinite(g.from) || !std::isfinite(g.to) || !std::isfinite(g.step)) {
    throw Error(ErrorCode::kSchema, "--eps values must be finite");
  }
  if (g.from < 0) throw Error(ErrorCode::kSchema, "--eps: from must be >= 0");
  if (g.step <= 0) throw Error(ErrorCode::kSchema, "--eps: step must be > 0");
  return g;
}

int run_sweep(const std::string& problem_path, const std::string& eps_spec,
              const std::string& csv_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const EpsGrid g = parse_eps_grid(eps_spec);
    const Problem p = load_problem(problem_path);
    validate(p);
    std::vector<double> grid;
    const double slack = 1e-9 * std::max(1.0, std::abs(g.to));
    for (std::size_t k = 0;; ++k) {
      const double e = g.from + static_cast<double>(k) * g.step;
      if (e > g.to + slack) break;
      grid.push_back(e);
    }
    if (grid.empty()) throw Error(ErrorCode::kSchema, "--eps grid is empty");

    std::vector<SweepRow> rows(grid.size());
    const std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t base = 0; base < grid.size(); base += threads) {
      std::vector<std::future<SweepRow>> pending;
      const std::size_t end = std::min(grid.size(), base + threads);
      for (std::size_t k = base; k < end; ++k) {
        pending.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                     sweep_point, p, grid[k]));
      }
      for (std::size_t k = base; k < end; ++k) rows[k] = pending[k - base].get();
    }

    std::string csv = "epsilon,upper,lower_frl,lower_sfrl,lower,mech_objective\n";
    char buf[256];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.epsilon,
                    r.upper, r.lower_frl, r.lower_sfrl, r.lower, r.mech);
      csv += buf;
    }
    write_file(csv_path, csv);
    out << "wrote " << rows.size() << " rows to " << csv_path << "\n";
    return int{kExitOk};
  });
}

}  // namespace privbound
