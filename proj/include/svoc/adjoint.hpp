#ifndef SVOC_ADJOINT_HPP_
#define SVOC_ADJOINT_HPP_

#include <vector>

#include "svoc/problem.hpp"
#include "svoc/quad.hpp"
#include "svoc/state.hpp"

namespace svoc {

/// Where an instant time landed on the grid.
struct InstantSnap {
  double requested = 0.0;
  int node = 0;
  double snapped = 0.0;
  double distance = 0.0;
};

std::vector<InstantSnap> snap_instants(const Problem& problem, const Grid& grid);

struct AdjointTrajectory {
  Trajectory psi;  // on midpoints
  std::vector<InstantSnap> snaps;
  // instant_magnitude[i][k]: |f_y(t_i, tau_k) (t_i - tau_k)^(a-1) h^i_y| for the i-th instant.
  std::vector<std::vector<double>> instant_magnitude;
};

/// Backward march of
///   psi(t) = int_t^T f_y(s, t, y*(t), u*(t)) (s - t)^(a-1) psi(s) ds - g_y(t, y*(t), u*(t))
///            - sum_i 1[t < t_i] f_y(t_i, t, y*(t), u*(t)) (t_i - t)^(a-1) h^i_y(y*(t_i))
/// on the midpoints, with y*, u* averaged from the nodes. The half cell next to
/// tau_k carries psi_k itself, so every step is a scalar linear solve.
/// Throws NumericalError on a zero diagonal coefficient or a non-finite value.
AdjointTrajectory solve_adjoint(const Problem& problem, const StatePair& pair, const Grid& grid);

}  // namespace svoc

#endif  // SVOC_ADJOINT_HPP_
