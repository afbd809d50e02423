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

#include "privbound/io.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "privbound/errors.h"

namespace privbound {
namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::kSchema, path + ": " + msg);
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << "line " << line << ", column " << col << ": malformed JSON";
    throw Error(ErrorCode::kSchema, msg.str());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_object(const json& j, const std::string& path,
                  std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) schema_error(path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) schema_error(path + "." + key, "unknown field");
  }
}

const json& field(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) schema_error(path + "." + key, "missing field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  return j.get<double>();
}

std::size_t index(const json& j, const std::string& path) {
  if (!j.is_number_integer()) schema_error(path, "expected a non-negative integer");
  if (j.is_number_unsigned()) return j.get<std::size_t>();
  const auto v = j.get<std::int64_t>();
  if (v < 0) schema_error(path, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array");
  return j;
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path, "expected a string");
  return j.get<std::string>();
}

std::vector<std::string> strings(const json& j, const std::string& path) {
  std::vector<std::string> out;
  std::size_t k = 0;
  for (const auto& e : array(j, path)) {
    out.push_back(text(e, path + "[" + std::to_string(k++) + "]"));
  }
  return out;
}

std::string at(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

Component parse_component(const json& j, const std::string& path) {
  check_object(j, path, {"name", "matrix", "labels"});
  std::string name = j.contains("name") ? text(j["name"], path + ".name") : "";
  const std::string mpath = path + ".matrix";
  const json& m = array(field(j, path, "matrix"), mpath);
  if (m.empty()) schema_error(mpath, "empty matrix");
  std::vector<std::vector<double>> matrix;
  for (std::size_t r = 0; r < m.size(); ++r) {
    const json& row = array(m[r], at(mpath, r));
    std::vector<double> vals;
    for (std::size_t c = 0; c < row.size(); ++c) {
      vals.push_back(number(row[c], at(at(mpath, r), c)));
    }
    if (r > 0 && vals.size() != matrix.front().size()) {
      std::ostringstream msg;
      msg << "row has " << vals.size() << " entries, expected " << matrix.front().size();
      schema_error(at(mpath, r), msg.str());
    }
    matrix.push_back(std::move(vals));
  }
  if (matrix.front().empty()) schema_error(mpath, "empty rows");
  std::vector<std::string> xl, yl;
  if (j.contains("labels")) {
    const std::string lpath = path + ".labels";
    const json& l = j["labels"];
    check_object(l, lpath, {"x", "y"});
    if (l.contains("x")) xl = strings(l["x"], lpath + ".x");
    if (l.contains("y")) yl = strings(l["y"], lpath + ".y");
    if (!xl.empty() && xl.size() != matrix.size()) {
      schema_error(lpath + ".x", "label count does not match the row count");
    }
    if (!yl.empty() && yl.size() != matrix.front().size()) {
      schema_error(lpath + ".y", "label count does not match the column count");
    }
  }
  try {
    return make_component(std::move(name), std::move(matrix), std::move(xl), std::move(yl));
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

json table_rows(const Kernel& k) {
  json rows = json::array();
  for (std::size_t x = 0; x < k.x_size(); ++x) {
    for (std::size_t y = 0; y < k.y_size(); ++y) {
      const auto col = k.column(x, y);
      rows.push_back(std::vector<double>(col.begin(), col.end()));
    }
  }
  return rows;
}

Kernel parse_kernel(const json& j, const std::string& path) {
  const std::size_t nx = index(field(j, path, "x_size"), path + ".x_size");
  const std::size_t ny = index(field(j, path, "y_size"), path + ".y_size");
  const std::size_t nu = index(field(j, path, "u_size"), path + ".u_size");
  if (nx == 0 || ny == 0 || nu == 0) schema_error(path, "alphabet sizes must be positive");
  const std::string tpath = path + ".table";
  const json& rows = array(field(j, path, "table"), tpath);
  if (rows.size() != nx * ny) {
    schema_error(tpath, "expected " + std::to_string(nx * ny) + " rows, one per (x, y)");
  }
  std::vector<double> t;
  t.reserve(nx * ny * nu);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const json& row = array(rows[r], at(tpath, r));
    if (row.size() != nu) {
      schema_error(at(tpath, r), "expected " + std::to_string(nu) + " entries");
    }
    for (std::size_t u = 0; u < nu; ++u) t.push_back(number(row[u], at(at(tpath, r), u)));
  }
  try {
    return Kernel(nx, ny, nu, std::move(t));
  } catch (const Error& e) {
    schema_error(tpath, e.what());
  }
}

std::string_view variant_name(AllocationVariant v) {
  return v == AllocationVariant::kFrl ? "frl" : "esfrl";
}

Allocation parse_allocation(const json& j, const std::string& path) {
  check_object(j, path, {"variant", "eps_per_component", "requested", "overflow", "saturated"});
  Allocation a;
  const std::string v = text(field(j, path, "variant"), path + ".variant");
  if (v == "frl") {
    a.variant = AllocationVariant::kFrl;
  } else if (v == "esfrl") {
    a.variant = AllocationVariant::kEsfrl;
  } else {
    schema_error(path + ".variant", "expected \"frl\" or \"esfrl\"");
  }
  const std::string epath = path + ".eps_per_component";
  const json& e = array(field(j, path, "eps_per_component"), epath);
  for (std::size_t i = 0; i < e.size(); ++i) a.eps_per_component.push_back(number(e[i], at(epath, i)));
  if (j.contains("requested")) a.requested = number(j["requested"], path + ".requested");
  if (j.contains("overflow")) a.overflow = number(j["overflow"], path + ".overflow");
  if (j.contains("saturated")) {
    const json& s = array(j["saturated"], path + ".saturated");
    for (std::size_t i = 0; i < s.size(); ++i) a.saturated.push_back(index(s[i], at(path + ".saturated", i)));
  }
  return a;
}

json allocation_raw(const Allocation& a) {
  return {{"variant", variant_name(a.variant)},
          {"eps_per_component", a.eps_per_component},
          {"requested", a.requested},
          {"overflow", a.overflow},
          {"saturated", a.saturated}};
}

}  // namespace

std::string_view unit_name(DisplayUnit u) { return u == DisplayUnit::kBits ? "bits" : "nats"; }

double to_display(double nats, DisplayUnit u) {
  return u == DisplayUnit::kBits ? nats / std::numbers::ln2 : nats;
}

Problem parse_problem(std::string_view body) {
  const json j = parse_json(body);
  check_object(j, "$", {"schema", "components", "users", "epsilon", "options"});
  const std::string schema = text(field(j, "$", "schema"), "$.schema");
  if (schema != kProblemSchema) {
    schema_error("$.schema", "unsupported schema '" + schema + "', expected '" +
                                 std::string(kProblemSchema) + "'");
  }
  Problem p;
  const json& comps = array(field(j, "$", "components"), "$.components");
  for (std::size_t i = 0; i < comps.size(); ++i) {
    p.components.push_back(parse_component(comps[i], at("$.components", i)));
  }
  const json& users = array(field(j, "$", "users"), "$.users");
  for (std::size_t k = 0; k < users.size(); ++k) {
    const std::string path = at("$.users", k);
    check_object(users[k], path, {"demands", "weight"});
    User u;
    const json& d = array(field(users[k], path, "demands"), path + ".demands");
    for (std::size_t i = 0; i < d.size(); ++i) u.demands.push_back(index(d[i], at(path + ".demands", i)));
    u.weight = number(field(users[k], path, "weight"), path + ".weight");
    p.users.push_back(std::move(u));
  }
  p.epsilon = number(field(j, "$", "epsilon"), "$.epsilon");
  if (j.contains("options")) {
    const json& o = j["options"];
    check_object(o, "$.options", {"log_display", "sfrl_constant"});
    if (o.contains("log_display")) {
      const std::string d = text(o["log_display"], "$.options.log_display");
      if (d == "nats") {
        p.options.display = DisplayUnit::kNats;
      } else if (d == "bits") {
        p.options.display = DisplayUnit::kBits;
      } else {
        schema_error("$.options.log_display", "expected \"nats\" or \"bits\"");
      }
    }
    if (o.contains("sfrl_constant")) {
      p.options.sfrl_constant = number(o["sfrl_constant"], "$.options.sfrl_constant");
    }
  }
  return p;
}

Problem load_problem(const std::string& path) { return parse_problem(read_file(path)); }

json problem_to_json(const Problem& p) {
  json comps = json::array();
  for (const auto& c : p.components) {
    json e = {{"name", c.name}, {"matrix", c.matrix}};
    if (!c.x_labels.empty() || !c.y_labels.empty()) {
      json l = json::object();
      if (!c.x_labels.empty()) l["x"] = c.x_labels;
      if (!c.y_labels.empty()) l["y"] = c.y_labels;
      e["labels"] = l;
    }
    comps.push_back(std::move(e));
  }
  json users = json::array();
  for (const auto& u : p.users) users.push_back({{"demands", u.demands}, {"weight", u.weight}});
  return {{"schema", kProblemSchema},
          {"components", comps},
          {"users", users},
          {"epsilon", p.epsilon},
          {"options",
           {{"log_display", unit_name(p.options.display)},
            {"sfrl_constant", p.options.sfrl_constant}}}};
}

json mechanism_to_json(const ComposedMechanism& m) {
  json parts = json::array();
  for (const auto& part : m.parts) {
    parts.push_back({{"tag", construction_name(part.tag)},
                     {"eps", part.eps},
                     {"x_size", part.kernel.x_size()},
                     {"y_size", part.kernel.y_size()},
                     {"u_size", part.kernel.u_size()},
                     {"table", table_rows(part.kernel)}});
  }
  return {{"schema", kMechanismSchema},
          {"kind", "composed"},
          {"components", parts},
          {"allocation", allocation_raw(m.allocation)}};
}

json mechanism_to_json(const Kernel& m) {
  return {{"schema", kMechanismSchema},
          {"kind", "monolithic"},
          {"x_size", m.x_size()},
          {"y_size", m.y_size()},
          {"u_size", m.u_size()},
          {"table", table_rows(m)}};
}

Mechanism parse_mechanism(std::string_view body) {
  const json j = parse_json(body);
  if (!j.is_object()) schema_error("$", "expected an object");
  const std::string schema = text(field(j, "$", "schema"), "$.schema");
  if (schema != kMechanismSchema) {
    schema_error("$.schema", "unsupported schema '" + schema + "', expected '" +
                                 std::string(kMechanismSchema) + "'");
  }
  const std::string kind = text(field(j, "$", "kind"), "$.kind");
  if (kind == "monolithic") {
    check_object(j, "$", {"schema", "kind", "x_size", "y_size", "u_size", "table"});
    return parse_kernel(j, "$");
  }
  if (kind != "composed") schema_error("$.kind", "expected \"composed\" or \"monolithic\"");
  check_object(j, "$", {"schema", "kind", "components", "allocation"});
  ComposedMechanism m;
  const json& parts = array(field(j, "$", "components"), "$.components");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string path = at("$.components", i);
    check_object(parts[i], path, {"tag", "eps", "x_size", "y_size", "u_size", "table"});
    ComponentMechanism cm;
    try {
      cm.tag = construction_from_name(text(field(parts[i], path, "tag"), path + ".tag"));
    } catch (const Error& e) {
      schema_error(path + ".tag", e.what());
    }
    cm.eps = parts[i].contains("eps") ? number(parts[i]["eps"], path + ".eps") : 0.0;
    cm.kernel = parse_kernel(parts[i], path);
    m.parts.push_back(std::move(cm));
  }
  if (j.contains("allocation")) m.allocation = parse_allocation(j["allocation"], "$.allocation");
  return m;
}

Mechanism load_mechanism(const std::string& path) { return parse_mechanism(read_file(path)); }

json allocation_to_json(const Allocation& a, DisplayUnit unit) {
  std::vector<double> eps;
  for (double e : a.eps_per_component) eps.push_back(to_display(e, unit));
  return {{"variant", variant_name(a.variant)},
          {"eps_per_component", eps},
          {"requested", to_display(a.requested, unit)},
          {"overflow", to_display(a.overflow, unit)},
          {"saturated", a.saturated}};
}

json stats_to_json(const Problem& p, const ProblemStats& s, DisplayUnit unit) {
  json comps = json::array();
  for (std::size_t i = 0; i < s.components.size(); ++i) {
    const auto& c = s.components[i];
    json e = {{"name", p.components[i].name},
              {"h_x", to_display(c.h_x, unit)},
              {"h_y", to_display(c.h_y, unit)},
              {"h_y_given_x", to_display(c.h_y_given_x, unit)},
              {"h_x_given_y", to_display(c.h_x_given_y, unit)},
              {"i_xy", to_display(c.i_xy, unit)},
              {"mu", c.mu},
              {"sfrl_excess", to_display(c.sfrl_excess, unit)},
              {"s1", to_display(c.s1, unit)},
              {"s2", to_display(c.s2, unit)},
              {"delta", to_display(c.delta, unit)}};
    e["gamma"] = c.gamma ? json(*c.gamma) : json(nullptr);
    comps.push_back(std::move(e));
  }
  return comps;
}

json bounds_to_json(const Problem& p, const BoundsReport& r, const ProblemStats& s,
                    DisplayUnit unit) {
  const auto d = [unit](double v) { return to_display(v, unit); };
  std::string regime = "general";
  if (r.trivial) {
    regime = "trivial";
  } else if (r.deterministic) {
    regime = "deterministic";
  } else if (r.perfect_privacy) {
    regime = "perfect_privacy";
  }
  json out = {{"unit", unit_name(unit)},
              {"regime", regime},
              {"trivial", r.trivial},
              {"deterministic", r.deterministic},
              {"perfect_privacy", r.perfect_privacy},
              {"epsilon", d(r.epsilon)},
              {"total_mi", d(s.total_mi)},
              {"components", stats_to_json(p, s, unit)}};
  if (r.trivial) {
    out["trivial_value"] = d(*r.trivial_value);
    out["upper"] = out["lower"] = d(*r.trivial_value);
    return out;
  }
  out["upper"] = d(r.upper);
  out["lower_frl"] = d(r.lower_frl);
  out["lower_sfrl"] = d(r.lower_sfrl);
  out["lower"] = d(r.lower);
  out["gap"] = d(r.gap);
  out["closed_form"] = {{"matches_split", r.closed_form},
                        {"upper", d(r.upper_closed_form)},
                        {"lower_frl", d(r.lower_frl_closed_form)},
                        {"lower_sfrl", d(r.lower_sfrl_closed_form)}};
  std::vector<double> beta;
  for (double b : r.beta) beta.push_back(d(b));
  out["beta"] = beta;
  out["esfrl_allocation"] = allocation_to_json(r.esfrl_allocation, unit);
  if (r.perfect) {
    const auto& pp = *r.perfect;
    std::vector<double> a, b, e;
    for (double v : pp.u0_first) a.push_back(d(v));
    for (double v : pp.u0_second) b.push_back(d(v));
    for (double v : pp.excess) e.push_back(d(v));
    out["perfect_privacy_block"] = {
        {"u0_first", a}, {"u0_second", b}, {"excess", e}, {"upper", d(pp.upper)}};
  }
  if (r.deterministic_value) {
    out["deterministic_block"] = {{"exact", d(*r.deterministic_value)},
                                  {"gap_to_lower_frl", d(*r.deterministic_value - r.lower_frl)}};
  }
  return out;
}

json mechanism_report_to_json(const MechanismReport& r, DisplayUnit unit) {
  const auto d = [unit](double v) { return to_display(v, unit); };
  std::vector<double> util, cl, cu;
  for (double v : r.utilities) util.push_back(d(v));
  for (double v : r.component_leakage) cl.push_back(d(v));
  for (double v : r.component_utility) cu.push_back(d(v));
  json out = {{"unit", unit_name(unit)},
              {"leakage", d(r.leakage)},
              {"utilities", util},
              {"objective", d(r.objective)},
              {"residual_y_given_xu", d(r.residual_y_given_xu)},
              {"cardinality", r.cardinality}};
  if (!cl.empty()) {
    out["component_leakage"] = cl;
    out["component_utility"] = cu;
  }
  return out;
}

json decomposition_to_json(const Decomposition& dec, DisplayUnit unit) {
  const auto d = [unit](double v) { return to_display(v, unit); };
  std::vector<std::size_t> sizes;
  for (const auto& c : dec.ubar) sizes.push_back(c.cols);
  return {{"ubar_sizes", sizes},
          {"leakage_u", d(dec.leakage_u)},
          {"leakage_ubar", d(dec.leakage_ubar)},
          {"leakage_preserved", std::abs(dec.leakage_u - dec.leakage_ubar) <= 1e-9},
          {"markov_residual", d(dec.markov_residual)},
          {"independence_residual", d(dec.independence_residual)}};
}

json transform_to_json(const TransformCheck& c, DisplayUnit unit) {
  const auto d = [unit](double v) { return to_display(v, unit); };
  json users = json::array();
  for (std::size_t j = 0; j < c.utility_u.size(); ++j) {
    users.push_back({{"utility_u", d(c.utility_u[j])},
                     {"utility_ustar", d(c.utility_ustar[j])},
                     {"slack", d(c.slack[j])}});
  }
  return {{"leakage_u", d(c.leakage_u)},
          {"leakage_ustar", d(c.leakage_ustar)},
          {"leakage_preserved", c.leakage_preserved},
          {"utility_bounded", c.utility_bounded},
          {"users", users}};
}

json sandwich_to_json(const SandwichReport& r, DisplayUnit unit) {
  const auto d = [unit](double v) { return to_display(v, unit); };
  json out = {{"unit", unit_name(unit)},
              {"lower", d(r.lower)},
              {"lower_frl", d(r.lower_frl)},
              {"lower_sfrl", d(r.lower_sfrl)},
              {"mechanism", d(r.mechanism)},
              {"mechanism_leakage", d(r.mechanism_leakage)},
              {"oracle", d(r.oracle)},
              {"oracle_leakage", d(r.oracle_leakage)},
              {"upper", d(r.upper)},
              {"checks",
               {{"lower_le_mechanism", r.lower_le_mechanism},
                {"mechanism_le_upper", r.mechanism_le_upper},
                {"mechanism_le_oracle", r.mechanism_le_oracle},
                {"oracle_le_upper", r.oracle_le_upper},
                {"holds", r.holds()}}},
              {"best_restart", r.search.best_restart}};
  if (r.exact) out["exact"] = d(*r.exact);
  std::vector<double> trace;
  for (double v : r.search.trace) trace.push_back(d(v));
  out["trace"] = trace;
  return out;
}

}  // namespace privbound
