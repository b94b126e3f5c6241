#include "svoc/adjoint.hpp"

#include <cmath>
#include <stdexcept>

#include "svoc/errors.hpp"

namespace svoc {

std::vector<InstantSnap> snap_instants(const Problem& problem, const Grid& grid) {
  std::vector<InstantSnap> snaps;
  for (std::size_t i = 0; i < problem.instant_count(); ++i) {
    InstantSnap s;
    s.requested = problem.instant_time(i);
    s.node = grid.nearest_node(s.requested);
    s.snapped = grid.node(s.node);
    s.distance = std::abs(s.snapped - s.requested);
    snaps.push_back(s);
  }
  return snaps;
}

AdjointTrajectory solve_adjoint(const Problem& problem, const StatePair& pair, const Grid& grid) {
  if (!(pair.y.grid == grid) || !(pair.u.grid == grid) || pair.y.placement != Placement::nodes ||
      pair.u.placement != Placement::nodes) {
    throw std::invalid_argument("reference pair must be sampled on the nodes of the adjoint grid");
  }
  const int n = grid.cells();
  const double alpha = problem.alpha();
  const MidpointWeights w(alpha, grid);
  const Trajectory ym = pair.y.to_midpoints();
  const Trajectory um = pair.u.to_midpoints();

  AdjointTrajectory out{Trajectory::zeros(grid, Placement::midpoints), snap_instants(problem, grid), {}};
  std::vector<double> h_y(out.snaps.size());
  for (std::size_t i = 0; i < out.snaps.size(); ++i) {
    h_y[i] = problem.h(i, Partial::y, pair.y[out.snaps[i].node]);
    out.instant_magnitude.emplace_back(n, 0.0);
  }

  std::vector<double>& psi = out.psi.values;
  for (int k = n - 1; k >= 0; --k) {
    const double tk = grid.midpoint(k);
    double rhs = -problem.g(Partial::y, tk, ym[k], um[k]);
    for (std::size_t i = 0; i < out.snaps.size(); ++i) {
      const double ti = out.snaps[i].snapped;
      if (!(tk < ti)) continue;
      const double term = problem.f(Partial::y, ti, tk, ym[k], um[k]) * std::pow(ti - tk, alpha - 1.0) * h_y[i];
      out.instant_magnitude[i][k] = std::abs(term);
      rhs -= term;
    }
    for (int j = k + 1; j < n; ++j) {
      rhs += w.right(k, j) * problem.f(Partial::y, grid.midpoint(j), tk, ym[k], um[k]) * psi[j];
    }
    const double diag = 1.0 - w.by_offset(0) * problem.f(Partial::y, tk, tk, ym[k], um[k]);
    if (diag == 0.0) throw NumericalError("adjoint step is singular", k);
    psi[k] = rhs / diag;
    if (!std::isfinite(psi[k])) throw NumericalError("adjoint is not finite", k);
  }
  return out;
}

}  // namespace svoc
