#ifndef SVOC_ORACLE_HPP_
#define SVOC_ORACLE_HPP_

#include <vector>

#include "svoc/problem.hpp"
#include "svoc/quad.hpp"
#include "svoc/state.hpp"

namespace svoc {

inline const std::vector<double> kDefaultDeltas = {1e-2, 5e-3, 2.5e-3};

struct ExpansionRow {
  double delta = 0.0;
  double delta_j = 0.0;       // J(u* + delta v) - J(u*)
  double first_order = 0.0;   // -delta int H_u v
  double second_order = 0.0;  // first_order - delta^2/2 QF[v]
  double residual = 0.0;      // delta_j - second_order
};

struct ExpansionReport {
  double j_star = 0.0;
  double first_variation = 0.0;  // int H_u v
  double quadratic_form = 0.0;   // QF[v], marched route
  std::vector<ExpansionRow> rows;
  std::vector<double> residual_ratios;  // r(delta_{i+1}) / r(delta_i)
};

/// Perturbs u* along v for every delta, recomputing J only through solve_state
/// and evaluate_cost, and compares with the first- and second-order models
/// built from the adjoint and the Hamiltonian fields. Box bounds are not applied.
ExpansionReport fd_expansion_check(const Problem& problem, const Trajectory& u_star, const Trajectory& v,
                                   const std::vector<double>& deltas, const Grid& grid);

struct VariationalReport {
  std::vector<double> deltas;
  std::vector<double> e1;  // sup |(y^d - y*)/d - Y1|
  std::vector<double> e2;  // sup |(y^d - y*)/d - Y1 - d/2 Y2|
  std::vector<double> ratio1;  // e1(d_i) / e1(d_{i+1})
  std::vector<double> ratio2;
};

VariationalReport variational_fd_check(const Problem& problem, const StatePair& pair, const Trajectory& v,
                                       const std::vector<double>& deltas, const Grid& grid);

/// E_alpha(z) = sum_n z^n / Gamma(n alpha + 1) for 0 < alpha <= 1, |z| <= 50.
/// Throws std::invalid_argument outside that domain, and NumericalError when
/// 10^4 terms do not suffice or when the alternating series for z < 0 cancels
/// away more than six digits of its largest term.
double mittag_leffler(double alpha, double z);

struct ConvergenceRow {
  int n = 0;
  double error = 0.0;  // relative sup error against E_alpha(lambda Gamma(alpha) t^alpha)
  double order = 0.0;  // log2(e(N) / e(next N)); 0 on the last row
};

std::vector<ConvergenceRow> convergence_study(double lambda, double alpha, const std::vector<int>& ns,
                                              double horizon = 1.0);

/// sup |y(eta + eps) - y(eta)| / eps for each N.
std::vector<double> stability_gains(const ProblemSpec& spec, const std::function<double(double)>& control,
                                    const std::vector<int>& ns, double eps);

}  // namespace svoc

#endif  // SVOC_ORACLE_HPP_
