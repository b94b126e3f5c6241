#include "svoc/optimality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "svoc/errors.hpp"

namespace svoc {

namespace {

struct InstantData {
  double time;
  int node;
  double h_y;
  double h_yy;
};

std::vector<InstantData> instant_data(const Problem& problem, const StatePair& pair, const Grid& grid) {
  std::vector<InstantData> out;
  const std::vector<InstantSnap> snaps = snap_instants(problem, grid);
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    const double y = pair.y[snaps[i].node];
    out.push_back({snaps[i].snapped, snaps[i].node, problem.h(i, Partial::y, y), problem.h(i, Partial::yy, y)});
  }
  return out;
}

HamiltonianField field_for(Partial p, const Problem& problem, const Trajectory& ym, const Trajectory& um,
                           const std::vector<InstantData>& instants, const Trajectory& psi, const Grid& grid,
                           const MidpointWeights& w) {
  const int n = grid.cells();
  const double h = grid.step();
  const double alpha = problem.alpha();
  HamiltonianField field{Trajectory::zeros(grid, Placement::midpoints), std::vector<double>(n, 0.0)};
  for (int k = 0; k < n; ++k) {
    const double tk = grid.midpoint(k);
    double smooth = -problem.g(p, tk, ym[k], um[k]);
    if (!problem.derivatives().f.is_zero(p)) {
      for (int j = k; j < n; ++j) smooth += w.right(k, j) * problem.f(p, grid.midpoint(j), tk, ym[k], um[k]) * psi[j];
    }
    double point = smooth;
    double cell = smooth * h;
    for (const InstantData& inst : instants) {
      if (!(tk < inst.time)) continue;
      const double c = problem.f(p, inst.time, tk, ym[k], um[k]) * inst.h_y;
      if (c == 0.0) continue;
      point -= c * std::pow(inst.time - tk, alpha - 1.0);
      cell -= c * power_integral(alpha, inst.time - grid.node(k + 1), inst.time - grid.node(k));
    }
    field.values[k] = point;
    field.cell_integrals[k] = cell;
  }
  return field;
}

double max_abs(const Trajectory& t) { return t.sup_norm(); }

}  // namespace

HamiltonianFields hamiltonian_fields(const Problem& problem, const StatePair& pair, const AdjointTrajectory& adjoint,
                                     const Grid& grid) {
  if (!(adjoint.psi.grid == grid) || adjoint.psi.placement != Placement::midpoints) {
    throw std::invalid_argument("adjoint must be sampled on the midpoints of the same grid");
  }
  const Trajectory ym = pair.y.to_midpoints();
  const Trajectory um = pair.u.to_midpoints();
  const std::vector<InstantData> instants = instant_data(problem, pair, grid);
  const MidpointWeights w(problem.alpha(), grid);
  auto make = [&](Partial p) { return field_for(p, problem, ym, um, instants, adjoint.psi, grid, w); };
  return {make(Partial::value), make(Partial::y),  make(Partial::u),
          make(Partial::uu),    make(Partial::yy), make(Partial::yu)};
}

SingularCheck detect_singular(const HamiltonianFields& fields, double tol) {
  SingularCheck check;
  check.tolerance = tol;
  const Trajectory& hu = fields.h_u.values;
  for (std::size_t k = 0; k < hu.size(); ++k) {
    if (std::abs(hu[k]) > check.sup_h_u) {
      check.sup_h_u = std::abs(hu[k]);
      check.index = static_cast<int>(k);
    }
  }
  check.location = hu.time(check.index);
  check.singular = check.sup_h_u <= tol;
  return check;
}

double default_tolerance(const HamiltonianFields& fields, double horizon) {
  return 1e-6 * (1.0 + max_abs(fields.h_uu.values) * horizon);
}

Eigen::MatrixXd response_matrix(const RegularizedKernel& q, double fraction) {
  const Grid& grid = q.grid();
  const int n = grid.cells();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  if (q.is_zero()) return g;
  for (int k = 0; k < n; ++k) {
    const double t = grid.node(k) + fraction * grid.step();
    for (int a = 0; a <= k; ++a) g(k, a) = q.cell_integral(t, a);
  }
  return g;
}

MKernel assemble_m_kernel(const Problem& problem, const StatePair& pair, const HamiltonianFields& fields,
                          const RegularizedKernel& q, const Grid& grid) {
  if (!(q.grid() == grid) || !(fields.h_yy.values.grid == grid)) {
    throw std::invalid_argument("Q, Hamiltonian fields and grid must agree");
  }
  const int n = grid.cells();
  const double h = grid.step();
  MKernel m{Eigen::MatrixXd::Zero(n, n), response_matrix(q)};
  if (q.is_zero()) return m;

  // Y1 grows like (t - s)^alpha inside the cell it starts from, so the outer
  // integral takes two Gauss points per cell rather than the midpoint.
  const Eigen::Map<const Eigen::VectorXd> d(fields.h_yy.cell_integrals.data(), n);
  const double offset = 0.5 / std::sqrt(3.0);
  const Eigen::MatrixXd lower = response_matrix(q, 0.5 - offset);
  const Eigen::MatrixXd upper = response_matrix(q, 0.5 + offset);
  Eigen::MatrixXd scaled = 0.5 * (lower.transpose() * d.asDiagonal() * lower + upper.transpose() * d.asDiagonal() * upper);
  for (const InstantData& inst : instant_data(problem, pair, grid)) {
    if (inst.h_yy == 0.0) continue;
    Eigen::VectorXd gi = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < n; ++a) gi[a] = q.cell_integral(inst.time, a);
    scaled.noalias() -= inst.h_yy * gi * gi.transpose();
  }
  m.values = 0.5 * (scaled + scaled.transpose()) / (h * h);
  return m;
}

double quadratic_form(const HamiltonianFields& fields, const MKernel& m, const RegularizedKernel& q,
                      const Trajectory& v, const Grid& grid) {
  if (!(v.grid == grid) || v.placement != Placement::midpoints) {
    throw std::invalid_argument("variation must be sampled on the midpoints of the kernel grid");
  }
  const int n = grid.cells();
  const double h = grid.step();
  double diagonal = 0.0;
  for (int k = 0; k < n; ++k) diagonal += fields.h_uu.cell_integrals[k] * v[k] * v[k];

  double curvature = 0.0;
  for (int a = 0; a < n; ++a) {
    double row = 0.0;
    for (int b = 0; b < n; ++b) row += m.values(a, b) * v[b];
    curvature += v[a] * row;
  }
  curvature *= h * h;

  double cross = 0.0;
  if (!q.is_zero()) {
    for (int k = 0; k < n; ++k) {
      const double weight = fields.h_yu.cell_integrals[k] * v[k];
      if (weight == 0.0) continue;
      double y1 = 0.0;
      for (int a = 0; a <= k; ++a) y1 += q.cell_integral(grid.midpoint(k), a) * v[a];
      cross += weight * y1;
    }
  }
  return diagonal + curvature + 2.0 * cross;
}

double quadratic_form_marched(const Problem& problem, const StatePair& pair, const HamiltonianFields& fields,
                              const Trajectory& v, const Grid& grid) {
  const Trajectory y1 = solve_y1(problem, pair, v, grid);
  const Trajectory y1m = y1.to_midpoints();
  const Trajectory vm = v.to_midpoints();
  double qf = 0.0;
  for (int k = 0; k < grid.cells(); ++k) {
    qf += fields.h_uu.cell_integrals[k] * vm[k] * vm[k] + fields.h_yy.cell_integrals[k] * y1m[k] * y1m[k] +
          2.0 * fields.h_yu.cell_integrals[k] * y1m[k] * vm[k];
  }
  for (const InstantData& inst : instant_data(problem, pair, grid)) qf -= inst.h_yy * y1[inst.node] * y1[inst.node];
  return qf;
}

Eigen::MatrixXd quadratic_form_matrix(const HamiltonianFields& fields, const MKernel& m) {
  const Eigen::Index n = m.values.rows();
  const double h = fields.h_uu.values.grid.step();
  const Eigen::Map<const Eigen::VectorXd> huu(fields.h_uu.cell_integrals.data(), n);
  const Eigen::Map<const Eigen::VectorXd> hyu(fields.h_yu.cell_integrals.data(), n);
  const Eigen::MatrixXd c = hyu.asDiagonal() * m.response;
  Eigen::MatrixXd k = h * h * m.values + c + c.transpose();
  k.diagonal() += huu;

  const double scale = 1.0 + k.cwiseAbs().maxCoeff();
  const double asymmetry = (k - k.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-12 * scale) throw NumericalError("quadratic-form matrix is not symmetric");
  return 0.5 * (k + k.transpose());
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::holds:
      return "holds";
    case Verdict::violated:
      return "violated";
    case Verdict::inconclusive:
      break;
  }
  return "inconclusive";
}

SecondOrderReport second_order_test(const Problem& problem, const StatePair& pair, const Grid& grid,
                                    const SecondOrderOptions& options) {
  if (options.kernel_cells < 2) throw std::invalid_argument("kernel grid needs at least 2 cells");
  SecondOrderReport report;
  {
    const AdjointTrajectory adjoint = solve_adjoint(problem, pair, grid);
    const HamiltonianFields fields = hamiltonian_fields(problem, pair, adjoint, grid);
    report.tolerance = options.tolerance.value_or(default_tolerance(fields, problem.horizon()));
    report.singular = detect_singular(fields, report.tolerance);
  }
  report.kernel_cells = std::min(grid.cells(), options.kernel_cells);
  if (!report.singular.singular) return report;

  const Grid kernel_grid(problem.horizon(), report.kernel_cells);
  StatePair kernel_pair = pair;
  if (!(kernel_grid == grid)) {
    const Trajectory u = Trajectory::sample(kernel_grid, Placement::nodes, [&](double t) { return pair.u.at(t); });
    kernel_pair = solve_pair(problem, u, kernel_grid);
  }
  const AdjointTrajectory adjoint = solve_adjoint(problem, kernel_pair, kernel_grid);
  const HamiltonianFields fields = hamiltonian_fields(problem, kernel_pair, adjoint, kernel_grid);
  const RegularizedKernel q = build_q_kernel(problem, kernel_pair, kernel_grid);
  const MKernel m = assemble_m_kernel(problem, kernel_pair, fields, q, kernel_grid);
  report.k = quadratic_form_matrix(fields, m);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(report.k);
  if (eig.info() != Eigen::Success) throw NumericalError("symmetric eigensolve did not converge");
  const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
  const Eigen::Index last = values.size() - 1;
  report.lambda_max = values[last];
  report.norm = std::max(std::abs(values[0]), std::abs(values[last]));
  report.verdict = report.lambda_max <= report.tolerance ? Verdict::holds : Verdict::violated;

  if (report.verdict == Verdict::violated) {
    Eigen::VectorXd v = eig.eigenvectors().col(last);
    Eigen::Index peak = 0;
    v.cwiseAbs().maxCoeff(&peak);
    v /= v[peak];
    report.direction_value = v.dot(report.k * v);
    report.direction = Trajectory(kernel_grid, Placement::midpoints, std::vector<double>(v.data(), v.data() + v.size()));
  }
  return report;
}

Trajectory cells_to_nodes(const Trajectory& cells, const Grid& target) {
  if (cells.placement != Placement::midpoints) throw std::invalid_argument("expected a cell-constant trajectory");
  const int cell_count = cells.grid.cells();
  const double step = cells.grid.step();
  return Trajectory::sample(target, Placement::nodes, [&](double t) {
    const int c = static_cast<int>(std::floor(t / step + 1e-9));
    return cells[std::clamp(c, 0, cell_count - 1)];
  });
}

Trajectory perturbed_control(const Problem& problem, const Trajectory& u, const Trajectory& v, double delta) {
  if (!(u.grid == v.grid) || u.placement != v.placement) throw std::invalid_argument("control and variation differ in layout");
  Trajectory out = u;
  const auto& bounds = problem.spec().control_bounds;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = u[i] + delta * v[i];
    if (bounds) out[i] = std::clamp(out[i], bounds->lo, bounds->hi);
  }
  return out;
}

}  // namespace svoc
