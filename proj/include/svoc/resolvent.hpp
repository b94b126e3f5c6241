#ifndef SVOC_RESOLVENT_HPP_
#define SVOC_RESOLVENT_HPP_

#include <functional>

#include <Eigen/Core>

#include "svoc/problem.hpp"
#include "svoc/quad.hpp"
#include "svoc/state.hpp"

namespace svoc {

/// Smooth two-point coefficient c(t, s), evaluated on s <= t.
using KernelCoefficient = std::function<double(double t, double s)>;

/// K(t, s) = c(t, s) (t - s)^(alpha-1) + R(t, s) for s < t.
///
/// The singular coefficient is kept as a callable; the regular part is
/// sampled on node pairs (t_k, t_j), j < k, and interpolated bilinearly
/// elsewhere. The diagonal R(t_k, t_k) is not a sample of the kernel (it
/// diverges for alpha < 1/2); it is filled with the nearest off-diagonal value
/// so interpolation stays bounded.
class RegularizedKernel {
 public:
  RegularizedKernel(double alpha, const Grid& grid, KernelCoefficient coefficient, Eigen::MatrixXd regular,
                    bool coefficient_zero);

  double alpha() const { return alpha_; }
  const Grid& grid() const { return grid_; }

  double coefficient(double t, double s) const { return coefficient_zero_ ? 0.0 : coefficient_(t, s); }
  double regular_node(int k, int j) const { return regular_(k, j); }
  double regular(double t, double s) const;
  // Full kernel value, s < t.
  double value(double t, double s) const;

  /// int over (cell ∩ [0, t]) of K(t, s) ds: the singular factor exactly,
  /// the coefficient and R sampled at the middle of the covered part.
  double cell_integral(double t, int cell) const;

  bool coefficient_is_zero() const { return coefficient_zero_; }
  bool is_zero() const;
  const Eigen::MatrixXd& regular_table() const { return regular_; }

 private:
  double alpha_;
  Grid grid_;
  KernelCoefficient coefficient_;
  Eigen::MatrixXd regular_;  // (N+1) x (N+1), lower triangle + filled diagonal
  bool coefficient_zero_;
};

/// Kernel solving K(t,s) = B(t,s)(t-s)^(a-1) + int_s^t A(t,tau)(t-tau)^(a-1) K(tau,s) dtau.
///
/// For each source column s = t_j the regular part is marched in t. On every
/// cell the doubly singular product (t-tau)^(a-1)(tau-s)^(a-1) is split at the
/// cell midpoint; on each half the factor whose pole is nearer is integrated in
/// closed form and the rest is sampled at the half's midpoint. R inside a cell
/// is the mean of its end values (the right value alone on the first cell), so
/// the last cell makes each step implicit in R(t_k, t_j), solved in closed form.
RegularizedKernel build_response_kernel(const KernelCoefficient& a_coefficient, const KernelCoefficient& b_coefficient,
                                        double alpha, const Grid& grid);

/// Resolvent Phi of y = eta + int A(t,s)(t-s)^(a-1) y(s) ds; coefficient c = A.
RegularizedKernel build_resolvent(const KernelCoefficient& a_coefficient, double alpha, const Grid& grid);

/// Q with Y1(t) = int_0^t Q(t,s) v(s) ds along the pair: the resolvent
/// construction driven by A = f_y(t,s,y*(s),u*(s)) with B = f_u(t,s,y*(s),u*(s)).
RegularizedKernel build_q_kernel(const Problem& problem, const StatePair& pair, const Grid& grid);

/// int_0^{t_k} K(t_k, s) v(s) ds at every node: product rectangle on the
/// singular part, trapezoid on the regular part.
Trajectory integrate_kernel(const RegularizedKernel& kernel, const Trajectory& v);

/// y = eta + int_0^t Phi(t,s) eta(s) ds.
Trajectory represent_solution(const RegularizedKernel& phi, const Trajectory& eta, const Grid& grid);

/// Largest |R(t_k,t_j) - int_{t_j}^{t_k} A(t_k,tau) K(tau,t_j)(t_k-tau)^(a-1) dtau| / (1 + |K|)
/// over sampled pairs, recomputed with the split-cell rule but with R read back
/// through interpolation at cell midpoints.
double resolvent_residual(const RegularizedKernel& kernel, const KernelCoefficient& a_coefficient);

}  // namespace svoc

#endif  // SVOC_RESOLVENT_HPP_
