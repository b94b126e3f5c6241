// One line per acceptance criterion: PASS/FAIL, the measured quantities and the
// pinned tolerances. Exit status is non-zero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "../support/derivative_check.hpp"
#include "svoc/optimality.hpp"
#include "svoc/oracle.hpp"
#include "svoc/resolvent.hpp"

using namespace svoc;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[1024];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

Trajectory constant(const Grid& g, double c) {
  return Trajectory::sample(g, Placement::nodes, [c](double) { return c; });
}

double relative_gap(const Trajectory& a, const Trajectory& b) {
  double diff = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) diff = std::max(diff, std::abs(a[k] - b[k]));
  return diff / std::max(a.sup_norm(), b.sup_norm());
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome worked_example() {
  const auto start = std::chrono::steady_clock::now();
  const Problem p(builtin_problem("paper_example"));
  const Grid g(1.0, 256);
  const Trajectory u0 = constant(g, 0.0);
  const Trajectory u1 = constant(g, -0.5);
  const Trajectory y0 = solve_state(p, u0, g);
  const Trajectory y1 = solve_state(p, u1, g);
  double e0 = 0.0;
  double e1 = 0.0;
  for (int k = 0; k <= 256; ++k) {
    const double t = g.node(k);
    e0 = std::max(e0, std::abs(y0[k] - (1 + t * std::sqrt(t))));
    e1 = std::max(e1, std::abs(y1[k] - 1.0));
  }
  const double j0 = evaluate_cost(p, y0, u0, g).total;
  const double j1 = evaluate_cost(p, y1, u1, g).total;
  const double elapsed = seconds_since(start);
  const bool pass = e0 <= 1e-12 && e1 <= 1e-12 && std::abs(j0 - 2) <= 1e-12 && std::abs(j1 - 0.5) <= 1e-12 &&
                    elapsed < 1.0;
  return {pass, fmt("u=0: max|y-(1+t^1.5)|=%.2e, J=%.17g; u=-1/2: max|y-1|=%.2e, J=%.17g "
                    "(tol 1e-12); %.3fs (< 1s)",
                    e0, j0, e1, j1, elapsed)};
}

Outcome analytic_convergence() {
  const auto start = std::chrono::steady_clock::now();
  const auto rows = convergence_study(1.0, 0.5, {256, 512, 1024, 2048, 4096});
  const double elapsed = seconds_since(start);
  bool decreasing = true;
  std::string errors;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && !(rows[i].error < rows[i - 1].error)) decreasing = false;
    errors += fmt("%s%d:%.3e", i ? " " : "", rows[i].n, rows[i].error);
  }
  const bool pass = decreasing && rows.back().error <= 1e-2 && elapsed < 10.0;
  return {pass, fmt("relative sup errors [%s], strictly decreasing=%s, N=4096 error <= 1e-2; %.2fs (< 10s)",
                    errors.c_str(), decreasing ? "yes" : "no", elapsed)};
}

Outcome resolvent_equivalence() {
  const Grid g(1.0, 1024);
  const Problem abel(builtin_problem("abel_linear", {{"lambda", 0.5}}));
  const RegularizedKernel phi = build_resolvent([](double, double) { return 0.5; }, 0.5, g);
  const double gap_phi = relative_gap(represent_solution(phi, constant(g, 1.0), g), solve_state(abel, constant(g, 0.0), g));

  const Problem lq(builtin_problem("lq", {{"a", 0.5}, {"b", 1.0}, {"r", 0.0}}));
  const StatePair pair = solve_pair(lq, constant(g, 0.0), g);
  const Trajectory v = Trajectory::sample(g, Placement::nodes, [](double t) { return 1 + std::sin(4 * t); });
  const double gap_q = relative_gap(integrate_kernel(build_q_kernel(lq, pair, g), v), solve_y1(lq, pair, v, g));
  return {gap_phi <= 1e-2 && gap_q <= 2e-2,
          fmt("resolvent vs marched state %.3e (<= 1e-2); Q route vs marched Y1 %.3e (<= 2e-2); N=1024", gap_phi, gap_q)};
}

Outcome variational_consistency() {
  // Ratios are asserted where the error is a genuine Taylor remainder. When the
  // generator is linear in the relevant variables the error is at roundoff
  // (<= 1e-10), where a halving ratio carries no information.
  constexpr double kExact = 1e-10;
  const Grid g(1.0, 2048);
  const Trajectory one = constant(g, 1.0);
  struct Case {
    const char* label;
    ProblemSpec spec;
    double control;
  };
  const Case cases[] = {
      {"lq(0.5,1,0)", builtin_problem("lq", {{"a", 0.5}, {"b", 1.0}, {"r", 0.0}}), 0.0},
      {"sing_quad(1)", builtin_problem("sing_quad", {{"c", 1.0}}), 0.0},
      {"paper_example", builtin_problem("paper_example"), 0.2},
  };
  bool pass = true;
  std::string detail;
  for (const Case& c : cases) {
    const Problem p(c.spec);
    const VariationalReport r = variational_fd_check(p, solve_pair(p, constant(g, c.control), g), one, kDefaultDeltas, g);
    auto judge = [&](const std::vector<double>& e, const std::vector<double>& ratios, double lo, double hi,
                     const char* name) {
      bool exact = true;
      for (double x : e) exact = exact && x <= kExact;
      std::string text = fmt("%s %s=", c.label, name);
      if (exact) {
        text += fmt("exact(max %.1e)", *std::max_element(e.begin(), e.end()));
      } else {
        for (std::size_t i = 0; i < ratios.size(); ++i) {
          text += fmt("%s%.3f", i ? "," : "", ratios[i]);
          if (!(ratios[i] >= lo && ratios[i] <= hi)) pass = false;
        }
      }
      detail += (detail.empty() ? "" : "; ") + text;
    };
    judge(r.e1, r.ratio1, 1.5, 2.5, "e1 ratios");
    judge(r.e2, r.ratio2, 3.0, 5.0, "e2 ratios");
  }
  return {pass, detail + " (e1 in [1.5,2.5], e2 in [3,5], N=2048)"};
}

Outcome expansion_identity() {
  const Problem p(builtin_problem("sing_quad", {{"c", 1.0}}));
  const Grid g(1.0, 2048);
  const ExpansionReport r = fd_expansion_check(p, constant(g, 0.0), constant(g, 1.0), kDefaultDeltas, g);

  const Grid kg(1.0, 1024);
  const StatePair pair = solve_pair(p, constant(kg, 0.0), kg);
  const HamiltonianFields fields = hamiltonian_fields(p, pair, solve_adjoint(p, pair, kg), kg);
  const RegularizedKernel q = build_q_kernel(p, pair, kg);
  const MKernel m = assemble_m_kernel(p, pair, fields, q, kg);
  const double qf = quadratic_form(fields, m, q, Trajectory::sample(kg, Placement::midpoints, [](double) { return 1.0; }), kg);

  bool ratios_ok = true;
  std::string ratios;
  for (std::size_t i = 0; i < r.residual_ratios.size(); ++i) {
    ratios += fmt("%s%.4f", i ? "," : "", r.residual_ratios[i]);
    ratios_ok = ratios_ok && std::abs(r.residual_ratios[i]) <= 0.3;
  }
  const bool pass = std::abs(qf + 16.0 / 3.0) <= 1e-2 && std::abs(r.quadratic_form + 16.0 / 3.0) <= 1e-2 && ratios_ok;
  return {pass, fmt("QF=%.6f (N=1024, kernel route), %.6f (N=2048, marched route), target -16/3 +- 1e-2; "
                    "r(d/2)/r(d)=[%s] (<= 0.3)",
                    qf, r.quadratic_form, ratios.c_str())};
}

Outcome second_order_verdicts() {
  const auto start = std::chrono::steady_clock::now();
  const Grid g(1.0, 1024);
  const Problem hold(builtin_problem("sing_quad", {{"c", 1.0}}));
  const SecondOrderReport a = second_order_test(hold, solve_pair(hold, constant(g, 0.0), g), g);
  const bool hold_ok = a.verdict == Verdict::holds && a.lambda_max <= 1e-8 * a.norm;

  const Problem bad(builtin_problem("sing_quad", {{"c", -1.0}}));
  const StatePair pair = solve_pair(bad, constant(g, 0.0), g);
  const SecondOrderReport b = second_order_test(bad, pair, g);
  bool confirmed = false;
  double dj = 0.0;
  if (b.verdict == Verdict::violated && b.direction) {
    const Trajectory u = perturbed_control(bad, pair.u, cells_to_nodes(*b.direction, g), 1e-2);
    dj = evaluate_cost(bad, solve_state(bad, u, g), u, g).total - evaluate_cost(bad, pair.y, pair.u, g).total;
    confirmed = dj < 0.0;
  }
  const double elapsed = seconds_since(start);
  return {hold_ok && confirmed && elapsed < 30.0,
          fmt("c=1: %s, lambda_max=%.3e, 1e-8*||K||=%.3e; c=-1: %s, lambda_max=%.3e, J(u*+0.01v)-J(u*)=%.3e (< 0); "
              "N=1024, kernel N=%d; %.2fs (< 30s)",
              verdict_name(a.verdict), a.lambda_max, 1e-8 * a.norm, verdict_name(b.verdict), b.lambda_max, dj,
              b.kernel_cells, elapsed)};
}

Outcome derivative_suite() {
  const ProblemSpec specs[] = {
      builtin_problem("paper_example"),
      builtin_problem("abel_linear", {{"lambda", 1.0}}),
      builtin_problem("sing_quad", {{"c", 1.0}}),
      builtin_problem("lq", {{"a", 0.5}, {"b", 1.0}, {"r", 0.3}}),
  };
  bool pass = true;
  std::string detail;
  for (const ProblemSpec& spec : specs) {
    const auto r = testing::check_derivatives(Problem(spec), 100, 2024);
    pass = pass && r.worst <= 1e-6;
    detail += fmt("%s%s %.1e (%d comparisons)", detail.empty() ? "" : "; ", spec.name.c_str(), r.worst, r.comparisons);
  }
  return {pass, detail + "; worst relative error <= 1e-6, 100 points each"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"worked example reproduction", worked_example},
      {"analytic convergence", analytic_convergence},
      {"resolvent equivalence", resolvent_equivalence},
      {"variational consistency", variational_consistency},
      {"expansion identity", expansion_identity},
      {"second-order verdicts", second_order_verdicts},
      {"symbolic derivatives", derivative_suite},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
