#include "svoc/problem.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "svoc/errors.hpp"

namespace svoc {

namespace {

std::string mask_names(VarMask mask) {
  std::string out;
  for (Var v : {Var::t, Var::s, Var::y, Var::u}) {
    if (!(mask & var_bit(v))) continue;
    if (!out.empty()) out += ", ";
    out += var_name(v);
  }
  return out;
}

void check_vars(const ScalarExpr& e, VarMask allowed, const std::string& what) {
  const VarMask extra = static_cast<VarMask>(e.variables() & ~allowed);
  if (extra) throw ProblemError(what + " may only use {" + mask_names(allowed) + "}, found " + mask_names(extra));
}

std::string literal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "(%.17g)", v);
  return buf;
}

ScalarExpr parse_field(const std::string& text, const std::string& what) {
  try {
    return parse_expression(text);
  } catch (const ParseError& e) {
    throw ProblemError(what + ": " + e.what());
  }
}

}  // namespace

void validate(const ProblemSpec& spec) {
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) throw ProblemError("alpha out of range (0, 1)");
  if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon)) throw ProblemError("T must be positive and finite");

  const VarMask t = var_bit(Var::t);
  const VarMask s = var_bit(Var::s);
  const VarMask y = var_bit(Var::y);
  const VarMask u = var_bit(Var::u);
  check_vars(spec.eta, t, "eta");
  check_vars(spec.f, t | s | y | u, "f");
  check_vars(spec.g, t | y | u, "g");

  double previous = -1.0;
  for (std::size_t i = 0; i < spec.instant_costs.size(); ++i) {
    const InstantCost& c = spec.instant_costs[i];
    check_vars(c.h, y, "instant cost h_" + std::to_string(i + 1));
    if (!(c.time >= 0.0 && c.time <= spec.horizon)) {
      throw ProblemError("instant time t_" + std::to_string(i + 1) + " outside [0, T]");
    }
    if (!(c.time > previous)) throw ProblemError("instant times must be strictly increasing");
    previous = c.time;
  }
  if (spec.control_bounds) {
    const ControlBounds& b = *spec.control_bounds;
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || b.lo > b.hi) throw ProblemError("control bounds must satisfy lo <= hi");
  }
}

Partials Partials::of(const ScalarExpr& e, DiffDiagnostics* diagnostics) {
  Partials p;
  const ScalarExpr dy = differentiate(e, Var::y, diagnostics);
  const ScalarExpr du = differentiate(e, Var::u, diagnostics);
  p.exprs = {e, dy, du, differentiate(dy, Var::y, diagnostics), differentiate(dy, Var::u, diagnostics),
             differentiate(du, Var::u, diagnostics)};
  for (int i = 0; i < kPartialCount; ++i) p.code[i] = CompiledExpr(p.exprs[i]);
  return p;
}

Problem::Problem(ProblemSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  eta_ = CompiledExpr(spec_.eta);
  DiffDiagnostics diag;
  derivs_.f = Partials::of(spec_.f, &diag);
  derivs_.g = Partials::of(spec_.g, &diag);
  for (const InstantCost& c : spec_.instant_costs) derivs_.h.push_back(Partials::of(c.h, &diag));
  non_smooth_ = diag.non_smooth;
  if (non_smooth_) {
    warnings_.push_back("derivatives pass through abs(); second-order data is discontinuous where its argument vanishes");
  }
}

const std::vector<BuiltinInfo>& builtin_registry() {
  static const std::vector<BuiltinInfo> registry = {
      {"paper_example", {}, "alpha=1/2, T=1, eta=1+t^(3/2), f=t*y*u, g=y*u, h=y at t=1, |u|<=1"},
      {"abel_linear", {"lambda"}, "f=lambda*y, eta=1, g=0; solution E_alpha(lambda Gamma(alpha) t^alpha)"},
      {"sing_quad", {"c"}, "f=c*u^2, g=y^2, eta=1; H_u vanishes at u=0"},
      {"lq", {"a", "b", "r"}, "f=a*y+b*u, g=y^2+r*u^2, eta=1"},
  };
  return registry;
}

ProblemSpec builtin_problem(std::string_view name, const std::map<std::string, double>& params) {
  const BuiltinInfo* info = nullptr;
  for (const BuiltinInfo& b : builtin_registry()) {
    if (b.name == name) info = &b;
  }
  if (!info) throw ProblemError("unknown builtin problem '" + std::string(name) + "'");

  std::set<std::string> allowed(info->required.begin(), info->required.end());
  allowed.insert("alpha");
  allowed.insert("T");
  for (const auto& [key, value] : params) {
    if (!allowed.count(key)) throw ProblemError("problem '" + info->name + "' has no parameter '" + key + "'");
  }
  for (const std::string& key : info->required) {
    if (!params.count(key)) throw ProblemError("problem '" + info->name + "' requires parameter '" + key + "'");
  }
  auto param = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };

  ProblemSpec spec;
  spec.name = info->name;
  spec.params = params;
  spec.alpha = param("alpha", 0.5);
  spec.horizon = param("T", 1.0);

  if (name == "paper_example") {
    spec.eta = parse_expression("1 + t*sqrt(t)");
    spec.f = parse_expression("t*y*u");
    spec.g = parse_expression("y*u");
    spec.instant_costs.push_back({spec.horizon, parse_expression("y")});
    spec.control_bounds = ControlBounds{-1.0, 1.0};
  } else if (name == "abel_linear") {
    spec.eta = parse_expression("1");
    spec.f = parse_expression(literal(params.at("lambda")) + "*y");
    spec.g = parse_expression("0");
  } else if (name == "sing_quad") {
    spec.eta = parse_expression("1");
    spec.f = parse_expression(literal(params.at("c")) + "*u^2");
    spec.g = parse_expression("y^2");
  } else {  // lq
    spec.eta = parse_expression("1");
    spec.f = parse_expression(literal(params.at("a")) + "*y + " + literal(params.at("b")) + "*u");
    spec.g = parse_expression("y^2 + " + literal(params.at("r")) + "*u^2");
  }
  validate(spec);
  return spec;
}

ProblemSpec problem_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ProblemError("problem file must hold a JSON object");
  static const std::set<std::string> known = {"name", "alpha", "T", "eta", "f", "g", "instant_costs", "control_bounds"};
  for (const auto& item : doc.items()) {
    if (!known.count(item.key())) throw ProblemError("unknown key '" + item.key() + "'");
  }
  auto number = [&](const char* key) {
    if (!doc.contains(key)) throw ProblemError(std::string("missing key '") + key + "'");
    if (!doc[key].is_number()) throw ProblemError(std::string("'") + key + "' must be a number");
    return doc[key].get<double>();
  };
  auto text = [&](const nlohmann::json& node, const std::string& key) {
    if (!node.contains(key)) throw ProblemError("missing key '" + key + "'");
    if (!node[key].is_string()) throw ProblemError("'" + key + "' must be an expression string");
    return parse_field(node[key].get<std::string>(), key);
  };

  ProblemSpec spec;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ProblemError("'name' must be a string");
    spec.name = doc["name"].get<std::string>();
  }
  spec.alpha = number("alpha");
  spec.horizon = number("T");
  spec.eta = text(doc, "eta");
  spec.f = text(doc, "f");
  spec.g = text(doc, "g");
  if (doc.contains("instant_costs")) {
    const auto& list = doc["instant_costs"];
    if (!list.is_array()) throw ProblemError("'instant_costs' must be an array");
    for (const auto& entry : list) {
      if (!entry.is_object() || !entry.contains("t") || !entry["t"].is_number()) {
        throw ProblemError("each instant cost needs a numeric 't' and an expression 'h'");
      }
      spec.instant_costs.push_back({entry["t"].get<double>(), text(entry, "h")});
    }
  }
  if (doc.contains("control_bounds") && !doc["control_bounds"].is_null()) {
    const auto& b = doc["control_bounds"];
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
      throw ProblemError("'control_bounds' must be [lo, hi]");
    }
    spec.control_bounds = ControlBounds{b[0].get<double>(), b[1].get<double>()};
  }
  validate(spec);
  return spec;
}

nlohmann::ordered_json problem_to_json(const ProblemSpec& spec) {
  nlohmann::ordered_json doc;
  doc["name"] = spec.name;
  doc["alpha"] = spec.alpha;
  doc["T"] = spec.horizon;
  doc["eta"] = spec.eta.to_string();
  doc["f"] = spec.f.to_string();
  doc["g"] = spec.g.to_string();
  doc["instant_costs"] = nlohmann::ordered_json::array();
  for (const InstantCost& c : spec.instant_costs) {
    doc["instant_costs"].push_back({{"t", c.time}, {"h", c.h.to_string()}});
  }
  if (spec.control_bounds) doc["control_bounds"] = {spec.control_bounds->lo, spec.control_bounds->hi};
  return doc;
}

Problem load_problem_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open problem file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ProblemError("problem file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return Problem(problem_from_json(doc));
}

}  // namespace svoc
