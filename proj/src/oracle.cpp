#include "svoc/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "svoc/adjoint.hpp"
#include "svoc/errors.hpp"
#include "svoc/optimality.hpp"

namespace svoc {

namespace {

void check_deltas(const std::vector<double>& deltas) {
  if (deltas.empty()) throw std::invalid_argument("at least one delta is required");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0)) throw std::invalid_argument("deltas must be positive");
    if (i > 0 && !(deltas[i] < deltas[i - 1])) throw std::invalid_argument("deltas must be decreasing");
  }
}

Trajectory shifted(const Trajectory& u, const Trajectory& v, double delta) {
  Trajectory out = u;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += delta * v[i];
  return out;
}

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

ExpansionReport fd_expansion_check(const Problem& problem, const Trajectory& u_star, const Trajectory& v,
                                   const std::vector<double>& deltas, const Grid& grid) {
  check_deltas(deltas);
  const StatePair pair = solve_pair(problem, u_star, grid);
  ExpansionReport report;
  report.j_star = evaluate_cost(problem, pair.y, pair.u, grid).total;

  const AdjointTrajectory adjoint = solve_adjoint(problem, pair, grid);
  const HamiltonianFields fields = hamiltonian_fields(problem, pair, adjoint, grid);
  const Trajectory vm = v.to_midpoints();
  for (int k = 0; k < grid.cells(); ++k) report.first_variation += fields.h_u.cell_integrals[k] * vm[k];
  report.quadratic_form = quadratic_form_marched(problem, pair, fields, v, grid);

  for (double delta : deltas) {
    const Trajectory u = shifted(u_star, v, delta);
    const Trajectory y = solve_state(problem, u, grid);
    ExpansionRow row;
    row.delta = delta;
    row.delta_j = evaluate_cost(problem, y, u, grid).total - report.j_star;
    row.first_order = -delta * report.first_variation;
    row.second_order = row.first_order - 0.5 * delta * delta * report.quadratic_form;
    row.residual = row.delta_j - row.second_order;
    report.rows.push_back(row);
  }
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    report.residual_ratios.push_back(ratio(report.rows[i].residual, report.rows[i - 1].residual));
  }
  return report;
}

VariationalReport variational_fd_check(const Problem& problem, const StatePair& pair, const Trajectory& v,
                                       const std::vector<double>& deltas, const Grid& grid) {
  check_deltas(deltas);
  const Trajectory y1 = solve_y1(problem, pair, v, grid);
  const Trajectory y2 = solve_y2(problem, pair, v, y1, grid);
  VariationalReport report;
  report.deltas = deltas;
  for (double delta : deltas) {
    const Trajectory y = solve_state(problem, shifted(pair.u, v, delta), grid);
    double e1 = 0.0;
    double e2 = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double quotient = (y[k] - pair.y[k]) / delta - y1[k];
      e1 = std::max(e1, std::abs(quotient));
      e2 = std::max(e2, std::abs(quotient - 0.5 * delta * y2[k]));
    }
    report.e1.push_back(e1);
    report.e2.push_back(e2);
  }
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    report.ratio1.push_back(ratio(report.e1[i - 1], report.e1[i]));
    report.ratio2.push_back(ratio(report.e2[i - 1], report.e2[i]));
  }
  return report;
}

double mittag_leffler(double alpha, double z) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("Mittag-Leffler parameter must lie in (0, 1]");
  if (!(std::abs(z) <= 50.0)) throw std::invalid_argument("Mittag-Leffler series is limited to |z| <= 50");
  if (z == 0.0) return 1.0;
  const double log_z = std::log(std::abs(z));
  double sum = 1.0;
  double compensation = 0.0;
  double previous = 1.0;
  double largest = 1.0;
  for (int n = 1; n < 10000; ++n) {
    double term = std::exp(n * log_z - std::lgamma(n * alpha + 1.0));
    if (!std::isfinite(term)) throw NumericalError("Mittag-Leffler series overflows");
    largest = std::max(largest, term);
    if (z < 0.0 && n % 2 == 1) term = -term;
    const double y = term - compensation;
    const double t = sum + y;
    compensation = (t - sum) - y;
    sum = t;
    if (std::abs(term) < 1e-16 * std::abs(sum) && std::abs(term) < previous) {
      // Alternating terms far larger than the sum leave only rounding noise.
      if (largest > 1e6 * std::abs(sum)) throw NumericalError("Mittag-Leffler series lost its precision to cancellation");
      return sum;
    }
    previous = std::abs(term);
  }
  throw NumericalError("Mittag-Leffler series did not converge within 10^4 terms");
}

std::vector<ConvergenceRow> convergence_study(double lambda, double alpha, const std::vector<int>& ns, double horizon) {
  const Problem problem(builtin_problem("abel_linear", {{"lambda", lambda}, {"alpha", alpha}, {"T", horizon}}));
  const double scale = lambda * std::tgamma(alpha);
  std::vector<ConvergenceRow> rows;
  for (int n : ns) {
    const Grid grid(horizon, n);
    const Trajectory y = solve_state(problem, Trajectory::zeros(grid, Placement::nodes), grid);
    double err = 0.0;
    double peak = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double exact = mittag_leffler(alpha, scale * std::pow(grid.node(k), alpha));
      err = std::max(err, std::abs(y[k] - exact));
      peak = std::max(peak, std::abs(exact));
    }
    rows.push_back({n, err / peak, 0.0});
  }
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (rows[i].error > 0.0 && rows[i + 1].error > 0.0) rows[i].order = std::log2(rows[i].error / rows[i + 1].error);
  }
  return rows;
}

std::vector<double> stability_gains(const ProblemSpec& spec, const std::function<double(double)>& control,
                                    const std::vector<int>& ns, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("perturbation size must be positive");
  const Problem base(spec);
  ProblemSpec shifted_spec = spec;
  shifted_spec.eta = spec.eta + ScalarExpr::constant(eps);
  const Problem perturbed(shifted_spec);
  std::vector<double> gains;
  for (int n : ns) {
    const Grid grid(spec.horizon, n);
    const Trajectory u = Trajectory::sample(grid, Placement::nodes, control);
    const Trajectory y0 = solve_state(base, u, grid);
    const Trajectory y1 = solve_state(perturbed, u, grid);
    double worst = 0.0;
    for (std::size_t k = 0; k < y0.size(); ++k) worst = std::max(worst, std::abs(y1[k] - y0[k]));
    gains.push_back(worst / eps);
  }
  return gains;
}

}  // namespace svoc
