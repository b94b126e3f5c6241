#ifndef SVOC_OPTIMALITY_HPP_
#define SVOC_OPTIMALITY_HPP_

#include <optional>
#include <string>

#include <Eigen/Core>

#include "svoc/adjoint.hpp"
#include "svoc/problem.hpp"
#include "svoc/resolvent.hpp"
#include "svoc/state.hpp"

namespace svoc {

/// A Hamiltonian quantity on the midpoints together with its integral over each
/// cell. The instant-cost terms carry (t_i - t)^(a-1), which the cell integrals
/// integrate exactly; everything else is taken as midpoint value times h.
struct HamiltonianField {
  Trajectory values;
  std::vector<double> cell_integrals;
};

struct HamiltonianFields {
  HamiltonianField h;
  HamiltonianField h_y;
  HamiltonianField h_u;
  HamiltonianField h_uu;
  HamiltonianField h_yy;
  HamiltonianField h_yu;
};

/// H(t) = int_t^T psi(s) f(s, t, y*(t), u*(t)) (s - t)^(a-1) ds - g(t, y*(t), u*(t))
///        - sum_i 1[t < t_i] f(t_i, t, y*(t), u*(t)) (t_i - t)^(a-1) h^i_y(y*(t_i)),
/// and the same with f, g replaced by their partials. H_y reproduces psi.
HamiltonianFields hamiltonian_fields(const Problem& problem, const StatePair& pair, const AdjointTrajectory& adjoint,
                                     const Grid& grid);

struct SingularCheck {
  bool singular = false;
  double sup_h_u = 0.0;
  int index = 0;       // midpoint index of the maximum
  double location = 0.0;
  double tolerance = 0.0;
};

SingularCheck detect_singular(const HamiltonianFields& fields, double tol);

/// 1e-6 (1 + max|H_uu| T).
double default_tolerance(const HamiltonianFields& fields, double horizon);

/// M on cell pairs, together with the response matrix it was built from.
struct MKernel {
  Eigen::MatrixXd values;    // M[a][b], cell-averaged
  Eigen::MatrixXd response;  // G at cell midpoints
};

/// G[k][a] = int over cell a below t of Q(t, s) ds with t = t_k + fraction h,
/// so that Y1(t) = sum_a G[k][a] v_a for v constant on cells.
Eigen::MatrixXd response_matrix(const RegularizedKernel& q, double fraction = 0.5);

/// M(tau, s) = int_{max(tau,s)}^T Q(t,s) H_yy(t) Q(t,tau) dt - sum_i Q(t_i,s) h^i_yy(y*(t_i)) Q(t_i,tau),
/// averaged over cell pairs: h^2 M = G^T diag(int H_yy) G - sum_i h^i_yy g_i g_i^T.
MKernel assemble_m_kernel(const Problem& problem, const StatePair& pair, const HamiltonianFields& fields,
                          const RegularizedKernel& q, const Grid& grid);

/// QF[v] = int H_uu v^2 + int int v M v + 2 int_0^T int_0^t v(t) H_yu(t) Q(t,s) v(s) ds dt
/// for v constant on cells (given at the midpoints).
double quadratic_form(const HamiltonianFields& fields, const MKernel& m, const RegularizedKernel& q,
                      const Trajectory& v, const Grid& grid);

/// The same functional with Y1 marched by solve_y1 instead of read from Q:
///   int H_uu v^2 + int H_yy Y1^2 - sum_i h^i_yy Y1(t_i)^2 + 2 int H_yu Y1 v.
/// O(N^2); `v` on nodes.
double quadratic_form_marched(const Problem& problem, const StatePair& pair, const HamiltonianFields& fields,
                              const Trajectory& v, const Grid& grid);

/// Symmetric K with v^T K v = QF[v]. Throws NumericalError when the assembled
/// matrix is asymmetric beyond 1e-12 relative before symmetrization.
Eigen::MatrixXd quadratic_form_matrix(const HamiltonianFields& fields, const MKernel& m);

enum class Verdict { holds, violated, inconclusive };
const char* verdict_name(Verdict v);

inline constexpr const char* kCrossTermConvention = "int_0^T int_0^t v(t) H_yu(t) Q(t,s) v(s) ds dt";

struct SecondOrderOptions {
  std::optional<double> tolerance;  // default_tolerance when empty
  int kernel_cells = 256;           // grid used for Q, M and K
};

struct SecondOrderReport {
  int kernel_cells = 0;
  SingularCheck singular;
  Eigen::MatrixXd k;
  double lambda_max = 0.0;
  double norm = 0.0;  // max |eigenvalue|
  Verdict verdict = Verdict::inconclusive;
  std::optional<Trajectory> direction;  // kernel-grid midpoints, max |v| = 1
  double direction_value = 0.0;         // v^T K v for the returned direction
  double tolerance = 0.0;
};

/// Runs the singularity check and, for a singular control, assembles K on a
/// grid of min(N, kernel_cells) cells (u* resampled there, y* re-solved) and
/// takes its largest eigenvalue.
SecondOrderReport second_order_test(const Problem& problem, const StatePair& pair, const Grid& grid,
                                    const SecondOrderOptions& options = {});

/// Cell-constant trajectory -> node samples on `target`, node t_j taking the
/// value of the cell that starts at or contains t_j (the last node takes the last cell).
Trajectory cells_to_nodes(const Trajectory& cells, const Grid& target);

/// u + delta v, clipped into the control bounds when the problem has them.
Trajectory perturbed_control(const Problem& problem, const Trajectory& u, const Trajectory& v, double delta);

}  // namespace svoc

#endif  // SVOC_OPTIMALITY_HPP_
