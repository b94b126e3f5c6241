#include "svoc/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>

#include "CLI11.hpp"

#include "svoc/adjoint.hpp"
#include "svoc/errors.hpp"
#include "svoc/optimality.hpp"
#include "svoc/oracle.hpp"
#include "svoc/report.hpp"

namespace svoc {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr double kConfirmationDelta = 1e-2;

struct CommonArgs {
  std::string problem;
  std::vector<std::string> params;
  std::string control = "0";
  int n = 256;
  std::string out = ".";
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_control = true) {
  cmd->add_option("--problem", a.problem, "builtin name or path to a JSON problem file")->required();
  cmd->add_option("--param", a.params, "builtin parameter as key=value (repeatable)");
  if (with_control) cmd->add_option("--control", a.control, "control as an expression in t")->capture_default_str();
  cmd->add_option("--n", a.n, "number of grid cells")->capture_default_str()->check(CLI::Range(2, 1 << 24));
  cmd->add_option("--out", a.out, "output directory (SVOC_OUT_DIR overrides)")->capture_default_str();
  cmd->add_flag("--timing", a.timing, "include wall-clock timings in JSON reports");
}

std::map<std::string, double> parse_params(const std::vector<std::string>& raw) {
  std::map<std::string, double> params;
  for (const std::string& item : raw) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ProblemError("parameter '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0') throw ProblemError("parameter '" + key + "' needs a numeric value");
    params[key] = value;
  }
  return params;
}

Problem resolve_problem(const CommonArgs& a) {
  for (const BuiltinInfo& info : builtin_registry()) {
    if (info.name == a.problem) return Problem(builtin_problem(a.problem, parse_params(a.params)));
  }
  const bool looks_like_path = a.problem.find('/') != std::string::npos || fs::path(a.problem).has_extension();
  if (!looks_like_path && !fs::exists(a.problem)) throw ProblemError("unknown builtin problem '" + a.problem + "'");
  if (!a.params.empty()) throw ProblemError("--param only applies to builtin problems");
  return load_problem_file(a.problem);
}

Trajectory sample_expression(const std::string& text, const Grid& grid, const char* what) {
  ScalarExpr e;
  try {
    e = parse_expression(text);
  } catch (const ParseError& ex) {
    throw ProblemError(std::string(what) + ": " + ex.what());
  }
  if (e.variables() & ~var_bit(Var::t)) throw ProblemError(std::string(what) + " must be an expression in t only");
  return Trajectory::sample(grid, Placement::nodes, e);
}

fs::path output_dir(const CommonArgs& a) {
  fs::path dir = a.out;
  if (const char* env = std::getenv("SVOC_OUT_DIR"); env && *env) dir = env;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

Json problem_json(const Problem& p) {
  Json doc;
  doc["name"] = p.spec().name;
  doc["params"] = Json::object();
  for (const auto& [k, v] : p.spec().params) doc["params"][k] = v;
  doc["alpha"] = p.alpha();
  doc["T"] = p.horizon();
  return doc;
}

Json cost_json(const CostBreakdown& c) {
  return Json{{"running", c.running}, {"instants", c.instants}, {"total", c.total}};
}

Json snaps_json(const std::vector<InstantSnap>& snaps) {
  Json list = Json::array();
  for (const InstantSnap& s : snaps) {
    list.push_back({{"requested", s.requested}, {"node", s.node}, {"snapped", s.snapped}, {"distance", s.distance}});
  }
  return list;
}

Json range_json(const Trajectory& t) {
  double lo = t[0];
  double hi = t[0];
  for (double v : t.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return Json{{"min", lo + 0.0}, {"max", hi + 0.0}};
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void finish(Json& doc, const std::vector<fs::path>& files, const CommonArgs& a, const Stopwatch& clock) {
  doc["files"] = Json::array();
  for (const fs::path& f : files) doc["files"].push_back(f.generic_string());
  if (a.timing) doc["timing_seconds"] = clock.seconds();
}

int cmd_list(std::ostream& out) {
  for (const BuiltinInfo& info : builtin_registry()) {
    std::string params;
    for (const std::string& p : info.required) params += (params.empty() ? "" : ",") + p;
    out << info.name << '(' << params << ")  " << info.summary << '\n';
  }
  return kExitOk;
}

int cmd_solve(const CommonArgs& a, std::ostream& out) {
  const Stopwatch clock;
  const Problem problem = resolve_problem(a);
  const Grid grid(problem.horizon(), a.n);
  const Trajectory u = sample_expression(a.control, grid, "control");
  const Trajectory y = solve_state(problem, u, grid);
  const CostBreakdown cost = evaluate_cost(problem, y, u, grid);
  const fs::path dir = output_dir(a);
  const fs::path state_file = dir / "state.csv";
  const fs::path cost_file = dir / "cost.json";
  write_text_file(state_file, trajectory_csv(y));

  Json doc;
  doc["problem"] = problem_json(problem);
  doc["n"] = a.n;
  doc["control"] = a.control;
  doc["cost"] = cost_json(cost);
  doc["instant_snaps"] = snaps_json(snap_instants(problem, grid));
  finish(doc, {state_file, cost_file}, a, clock);
  write_text_file(cost_file, json_text(doc));
  out << "J = " << format_number(cost.total) << "  (running " << format_number(cost.running) << ")\n";
  out << "wrote " << state_file.generic_string() << ", " << cost_file.generic_string() << '\n';
  return kExitOk;
}

int cmd_adjoint(const CommonArgs& a, std::ostream& out) {
  const Problem problem = resolve_problem(a);
  const Grid grid(problem.horizon(), a.n);
  const StatePair pair = solve_pair(problem, sample_expression(a.control, grid, "control"), grid);
  const AdjointTrajectory adjoint = solve_adjoint(problem, pair, grid);
  const fs::path file = output_dir(a) / "adjoint.csv";
  write_text_file(file, trajectory_csv(adjoint.psi, "psi"));
  for (const InstantSnap& s : adjoint.snaps) {
    out << "instant " << format_number(s.requested) << " snapped to node " << s.node << " (distance "
        << format_number(s.distance) << ")\n";
  }
  out << "psi in [" << format_number(range_json(adjoint.psi)["min"].get<double>()) << ", "
      << format_number(range_json(adjoint.psi)["max"].get<double>()) << "]\n";
  out << "wrote " << file.generic_string() << '\n';
  return kExitOk;
}

int cmd_check(const CommonArgs& a, int order, const std::optional<double>& tol, int kernel_n, std::ostream& out) {
  const Stopwatch clock;
  const Problem problem = resolve_problem(a);
  const Grid grid(problem.horizon(), a.n);
  const StatePair pair = solve_pair(problem, sample_expression(a.control, grid, "control"), grid);
  const CostBreakdown cost = evaluate_cost(problem, pair.y, pair.u, grid);
  const AdjointTrajectory adjoint = solve_adjoint(problem, pair, grid);
  const HamiltonianFields fields = hamiltonian_fields(problem, pair, adjoint, grid);
  const double tolerance = tol.value_or(default_tolerance(fields, problem.horizon()));
  const SingularCheck singular = detect_singular(fields, tolerance);
  const fs::path dir = output_dir(a);
  std::vector<fs::path> files;

  Json doc;
  doc["problem"] = problem_json(problem);
  doc["n"] = a.n;
  doc["control"] = a.control;
  doc["cost"] = cost_json(cost);
  doc["instant_snaps"] = snaps_json(adjoint.snaps);
  doc["psi"] = range_json(adjoint.psi);
  doc["hamiltonian"] = range_json(fields.h.values);
  doc["sup_h_u"] = singular.sup_h_u;
  doc["sup_h_u_at"] = singular.location;
  doc["tolerance"] = tolerance;
  doc["singular"] = singular.singular;
  out << "J = " << format_number(cost.total) << '\n';
  out << "sup|H_u| = " << format_number(singular.sup_h_u) << " at t = " << format_number(singular.location)
      << (singular.singular ? "  -> singular\n" : "  -> not singular\n");

  if (order == 2) {
    SecondOrderOptions options;
    options.tolerance = tolerance;
    options.kernel_cells = kernel_n;
    const SecondOrderReport report = second_order_test(problem, pair, grid, options);
    Json second;
    second["verdict"] = verdict_name(report.verdict);
    second["kernel_n"] = report.kernel_cells;
    second["tolerance"] = report.tolerance;
    second["cross_term_convention"] = kCrossTermConvention;
    if (report.singular.singular) {
      second["lambda_max"] = report.lambda_max;
      second["norm"] = report.norm;
    }
    if (report.direction) {
      const fs::path direction_file = dir / "direction.csv";
      write_text_file(direction_file, trajectory_csv(*report.direction, "v"));
      files.push_back(direction_file);
      second["direction_file"] = direction_file.generic_string();
      second["direction_quadratic_form"] = report.direction_value;
      const Trajectory v = cells_to_nodes(*report.direction, grid);
      const Trajectory u = perturbed_control(problem, pair.u, v, kConfirmationDelta);
      const Trajectory y = solve_state(problem, u, grid);
      const double j = evaluate_cost(problem, y, u, grid).total;
      second["confirmation"] = {{"delta", kConfirmationDelta},
                                {"j_star", cost.total},
                                {"j_perturbed", j},
                                {"cost_decreased", j < cost.total}};
      out << "second order: violated, lambda_max = " << format_number(report.lambda_max)
          << (j < cost.total ? ", J decreases along the returned direction\n"
                             : ", J does not decrease along the returned direction\n");
    } else {
      out << "second order: " << verdict_name(report.verdict);
      if (report.singular.singular) out << ", lambda_max = " << format_number(report.lambda_max);
      out << '\n';
    }
    doc["second_order"] = second;
  }

  const fs::path report_file = dir / "check.json";
  files.insert(files.begin(), report_file);
  finish(doc, files, a, clock);
  write_text_file(report_file, json_text(doc));
  out << "wrote " << report_file.generic_string() << '\n';
  return kExitOk;
}

int cmd_verify(const CommonArgs& a, const std::string& direction, const std::vector<double>& deltas,
               std::ostream& out) {
  const Stopwatch clock;
  const Problem problem = resolve_problem(a);
  const Grid grid(problem.horizon(), a.n);
  const Trajectory u = sample_expression(a.control, grid, "control");
  const Trajectory v = sample_expression(direction, grid, "direction");
  const ExpansionReport expansion = fd_expansion_check(problem, u, v, deltas, grid);
  const VariationalReport variational = variational_fd_check(problem, solve_pair(problem, u, grid), v, deltas, grid);
  const fs::path dir = output_dir(a);
  const fs::path expansion_file = dir / "expansion.csv";
  const fs::path variational_file = dir / "variational.csv";
  const fs::path report_file = dir / "verify.json";

  std::vector<std::vector<double>> rows;
  Json exp_rows = Json::array();
  for (const ExpansionRow& r : expansion.rows) {
    rows.push_back({r.delta, r.delta_j, r.first_order, r.second_order, r.residual});
    exp_rows.push_back({{"delta", r.delta},
                        {"delta_j", r.delta_j},
                        {"first_order", r.first_order},
                        {"second_order", r.second_order},
                        {"residual", r.residual}});
  }
  write_text_file(expansion_file, table_csv({"delta", "delta_j", "first_order", "second_order", "residual"}, rows));
  rows.clear();
  for (std::size_t i = 0; i < variational.deltas.size(); ++i) {
    rows.push_back({variational.deltas[i], variational.e1[i], variational.e2[i]});
  }
  write_text_file(variational_file, table_csv({"delta", "e1", "e2"}, rows));

  Json doc;
  doc["problem"] = problem_json(problem);
  doc["n"] = a.n;
  doc["control"] = a.control;
  doc["direction"] = direction;
  doc["expansion"] = {{"j_star", expansion.j_star},
                      {"first_variation", expansion.first_variation},
                      {"quadratic_form", expansion.quadratic_form},
                      {"rows", exp_rows},
                      {"residual_ratios", expansion.residual_ratios}};
  doc["variational"] = {{"deltas", variational.deltas},
                        {"e1", variational.e1},
                        {"e2", variational.e2},
                        {"ratio1", variational.ratio1},
                        {"ratio2", variational.ratio2}};
  finish(doc, {report_file, expansion_file, variational_file}, a, clock);
  write_text_file(report_file, json_text(doc));

  out << "QF[v] = " << format_number(expansion.quadratic_form) << ", int H_u v = "
      << format_number(expansion.first_variation) << '\n';
  for (const ExpansionRow& r : expansion.rows) {
    out << "delta " << format_number(r.delta) << ": dJ " << format_number(r.delta_j) << ", residual "
        << format_number(r.residual) << '\n';
  }
  out << "wrote " << report_file.generic_string() << '\n';
  return kExitOk;
}

int cmd_converge(double lambda, double alpha, const std::vector<int>& ns, const std::string& out_arg,
                 std::ostream& out) {
  CommonArgs a;
  a.out = out_arg;
  const std::vector<ConvergenceRow> table = convergence_study(lambda, alpha, ns);
  std::vector<std::vector<double>> rows;
  for (const ConvergenceRow& r : table) {
    rows.push_back({static_cast<double>(r.n), r.error, r.order});
    out << "N = " << r.n << ": relative sup error " << format_number(r.error) << '\n';
  }
  const fs::path file = output_dir(a) / "convergence.csv";
  write_text_file(file, table_csv({"n", "error", "order"}, rows));
  out << "wrote " << file.generic_string() << '\n';
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal control of weakly singular Volterra equations: solve, adjoint, optimality checks"};
  app.name("svoc");
  app.require_subcommand(1);

  CommonArgs common;
  auto* list = app.add_subcommand("list-problems", "list builtin problems");
  auto* solve = app.add_subcommand("solve", "solve the state equation and evaluate the cost");
  auto* adjoint = app.add_subcommand("adjoint", "solve the adjoint equation");
  auto* check = app.add_subcommand("check", "first- and second-order optimality checks");
  auto* verify = app.add_subcommand("verify", "finite-difference verification of the cost expansion");
  auto* converge = app.add_subcommand("converge", "convergence study against the Mittag-Leffler solution");
  for (auto* cmd : {solve, adjoint, check, verify}) add_common(cmd, common);

  int order = 1;
  std::optional<double> tol;
  int kernel_n = 256;
  check->add_option("--order", order, "1 or 2")->capture_default_str()->check(CLI::IsMember({1, 2}));
  check->add_option("--tol", tol, "singularity and eigenvalue tolerance");
  check->add_option("--kernel-n", kernel_n, "cells of the grid used for the O(N^3) kernel assembly")
      ->capture_default_str()
      ->check(CLI::Range(2, 1 << 16));

  std::string direction = "1";
  std::vector<double> deltas = kDefaultDeltas;
  verify->add_option("--direction", direction, "variation as an expression in t")->capture_default_str();
  verify->add_option("--deltas", deltas, "decreasing step sizes")->delimiter(',');

  double lambda = 1.0;
  double alpha = 0.5;
  std::vector<int> ns = {256, 512, 1024, 2048, 4096};
  std::string converge_out = ".";
  converge->add_option("--lambda", lambda)->capture_default_str();
  converge->add_option("--alpha", alpha)->capture_default_str();
  converge->add_option("--ns", ns, "comma-separated grid sizes")->delimiter(',');
  converge->add_option("--out", converge_out, "output directory (SVOC_OUT_DIR overrides)")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*list) return cmd_list(out);
    if (*solve) return cmd_solve(common, out);
    if (*adjoint) return cmd_adjoint(common, out);
    if (*check) return cmd_check(common, order, tol, kernel_n, out);
    if (*verify) return cmd_verify(common, direction, deltas, out);
    return cmd_converge(lambda, alpha, ns, converge_out, out);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace svoc
