#include "svoc/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "svoc/errors.hpp"

namespace svoc {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Position of quarter point q: (2q + 1) h / 4. Quarter points 2m and 2m+1 are
// the centres of the left and right halves of cell m.
double quarter_point(const Grid& grid, int q) { return (2 * q + 1) * 0.25 * grid.step(); }

// Closed-form pieces of the split-cell rule on a uniform grid.
struct SplitCellRule {
  SplitCellRule(double alpha, const Grid& grid) : half_cell(2 * grid.cells() + 1), quarter_pow(4 * grid.cells() + 1) {
    const double h = grid.step();
    const double scale = std::pow(h, alpha);
    for (std::size_t i = 0; i < half_cell.size(); ++i) {
      half_cell[i] = scale * power_integral(alpha, 0.5 * i, 0.5 * (i + 1));
    }
    quarter_pow[0] = 0.0;
    for (std::size_t i = 1; i < quarter_pow.size(); ++i) quarter_pow[i] = std::pow(0.25 * i * h, alpha - 1.0);
  }

  // Weight of the left half of cell j+p for a source column at t_j and target t_{j+d}.
  double left(int p, int d) const {
    if (4 * p + 1 <= 2 * d) return half_cell[2 * p] * quarter_pow[4 * (d - p) - 1];
    return half_cell[2 * (d - p) - 1] * quarter_pow[4 * p + 1];
  }
  double right(int p, int d) const {
    if (4 * p + 3 <= 2 * d) return half_cell[2 * p + 1] * quarter_pow[4 * (d - p) - 3];
    return half_cell[2 * (d - p) - 2] * quarter_pow[4 * p + 3];
  }

  std::vector<double> half_cell;    // int of x^(a-1) over [i h/2, (i+1) h/2]
  std::vector<double> quarter_pow;  // (i h/4)^(a-1)
};

void fill_diagonal(Eigen::MatrixXd& r) {
  const Eigen::Index n = r.rows() - 1;
  for (Eigen::Index k = 0; k < n; ++k) r(k, k) = r(k + 1, k);
  r(n, n) = r(n, n - 1);
}

}  // namespace

// ---------------------------------------------------------- RegularizedKernel

RegularizedKernel::RegularizedKernel(double alpha, const Grid& grid, KernelCoefficient coefficient,
                                     Eigen::MatrixXd regular, bool coefficient_zero)
    : alpha_(alpha),
      grid_(grid),
      coefficient_(std::move(coefficient)),
      regular_(std::move(regular)),
      coefficient_zero_(coefficient_zero) {
  if (regular_.rows() != grid.cells() + 1 || regular_.cols() != grid.cells() + 1) {
    throw std::invalid_argument("regular part must be sampled on (N+1) x (N+1) node pairs");
  }
}

double RegularizedKernel::regular(double t, double s) const {
  const int n = grid_.cells();
  const double x = std::clamp(t / grid_.step(), 0.0, static_cast<double>(n));
  const double z = std::clamp(s / grid_.step(), 0.0, static_cast<double>(n));
  const int i = std::min(static_cast<int>(x), n - 1);
  const int j = std::min(static_cast<int>(z), n - 1);
  const double fx = x - i;
  const double fz = z - j;
  auto at = [&](int a, int b) { return b > a ? regular_(a, a) : regular_(a, b); };
  return (1 - fx) * (1 - fz) * at(i, j) + fx * (1 - fz) * at(i + 1, j) + (1 - fx) * fz * at(i, j + 1) +
         fx * fz * at(i + 1, j + 1);
}

double RegularizedKernel::value(double t, double s) const {
  const double singular = coefficient_zero_ ? 0.0 : coefficient_(t, s) * std::pow(t - s, alpha_ - 1.0);
  return singular + regular(t, s);
}

double RegularizedKernel::cell_integral(double t, int cell) const {
  const double lo = grid_.node(cell);
  if (t <= lo) return 0.0;
  const double hi = std::min(grid_.node(cell + 1), t);
  const double length = hi - lo;
  const double s_mid = lo + 0.5 * length;
  double sum = regular(t, s_mid) * length;
  if (!coefficient_zero_) sum += coefficient_(t, s_mid) * power_integral(alpha_, t - hi, t - lo);
  return sum;
}

bool RegularizedKernel::is_zero() const { return coefficient_zero_ && regular_.isZero(0.0); }

// ------------------------------------------------------------ construction

RegularizedKernel build_response_kernel(const KernelCoefficient& a_coefficient, const KernelCoefficient& b_coefficient,
                                        double alpha, const Grid& grid) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha out of range (0, 1)");
  const int n = grid.cells();

  // Samples of the coefficients on the points the split-cell rule touches.
  RowMatrix a_quarter = RowMatrix::Zero(n + 1, 2 * n);  // A(t_k, quarter q), q < 2k
  RowMatrix a_mid = RowMatrix::Zero(n + 1, n);          // A(t_k, tau_m), m < k
  RowMatrix b_quarter = RowMatrix::Zero(n + 1, 2 * n);  // B(quarter q, t_j), q >= 2j
  bool a_zero = true;
  bool b_zero = true;
  for (int k = 1; k <= n; ++k) {
    const double tk = grid.node(k);
    for (int q = 0; q < 2 * k; ++q) {
      a_quarter(k, q) = a_coefficient(tk, quarter_point(grid, q));
      a_zero = a_zero && a_quarter(k, q) == 0.0;
    }
    for (int m = 0; m < k; ++m) a_mid(k, m) = a_coefficient(tk, grid.midpoint(m));
  }
  for (int j = 0; j < n; ++j) {
    const double tj = grid.node(j);
    for (int q = 2 * j; q < 2 * n; ++q) {
      b_quarter(j, q) = b_coefficient(quarter_point(grid, q), tj);
      b_zero = b_zero && b_quarter(j, q) == 0.0;
    }
  }
  // Coefficient probe on node pairs, which the quarter samples never touch.
  for (int k = 1; k <= n && b_zero; ++k) {
    for (int j = 0; j < k && b_zero; ++j) b_zero = b_coefficient(grid.node(k), grid.node(j)) == 0.0;
  }

  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n + 1, n + 1);
  if (!a_zero && !b_zero) {
    const SplitCellRule split(alpha, grid);
    const SingularWeights w(alpha, grid);
    for (int j = 0; j < n; ++j) {
      for (int k = j + 1; k <= n; ++k) {
        const int d = k - j;
        const double* aq = a_quarter.row(k).data();
        const double* bq = b_quarter.row(j).data();
        double sum = 0.0;
        for (int p = 0; p < d; ++p) {
          const int m = j + p;
          sum += split.left(p, d) * aq[2 * m] * bq[2 * m] + split.right(p, d) * aq[2 * m + 1] * bq[2 * m + 1];
        }
        // Regular part on cells j .. k-2; cell k-1 carries the unknown.
        for (int m = j; m < k - 1; ++m) {
          const double r_cell = m == j ? r(j + 1, j) : 0.5 * (r(m, j) + r(m + 1, j));
          sum += a_mid(k, m) * w.by_offset(k - m) * r_cell;
        }
        const double last = a_mid(k, k - 1) * w.by_offset(1);
        double implicit = last;
        if (k - 1 > j) {
          sum += 0.5 * last * r(k - 1, j);
          implicit = 0.5 * last;
        }
        const double denom = 1.0 - implicit;
        if (denom == 0.0) throw NumericalError("resolvent step is singular", k);
        r(k, j) = sum / denom;
        if (!std::isfinite(r(k, j))) {
          throw NumericalError("resolvent regular part is not finite at (" + std::to_string(k) + ", " +
                               std::to_string(j) + ")");
        }
      }
    }
  }
  fill_diagonal(r);
  return RegularizedKernel(alpha, grid, b_coefficient, std::move(r), b_zero);
}

RegularizedKernel build_resolvent(const KernelCoefficient& a_coefficient, double alpha, const Grid& grid) {
  return build_response_kernel(a_coefficient, a_coefficient, alpha, grid);
}

RegularizedKernel build_q_kernel(const Problem& problem, const StatePair& pair, const Grid& grid) {
  if (!(pair.y.grid == grid) || pair.y.placement != Placement::nodes) {
    throw std::invalid_argument("reference pair must live on the kernel grid nodes");
  }
  auto partial = [problem, y = pair.y, u = pair.u](Partial p) {
    return [problem, y, u, p](double t, double s) { return problem.f(p, t, s, y.at(s), u.at(s)); };
  };
  return build_response_kernel(partial(Partial::y), partial(Partial::u), problem.alpha(), grid);
}

// ------------------------------------------------------------- application

Trajectory integrate_kernel(const RegularizedKernel& kernel, const Trajectory& v) {
  const Grid& grid = kernel.grid();
  if (!(v.grid == grid) || v.placement != Placement::nodes) {
    throw std::invalid_argument("kernel and data must share the node grid");
  }
  const int n = grid.cells();
  const double h = grid.step();
  const SingularWeights w(kernel.alpha(), grid);
  std::vector<double> out(n + 1, 0.0);
  for (int k = 1; k <= n; ++k) {
    const double tk = grid.node(k);
    double singular = 0.0;
    if (!kernel.coefficient_is_zero()) {
      for (int j = 0; j < k; ++j) singular += w.by_offset(k - j) * kernel.coefficient(tk, grid.node(j)) * v[j];
    }
    double regular = 0.5 * (kernel.regular_node(k, 0) * v[0] + kernel.regular_node(k, k) * v[k]);
    for (int j = 1; j < k; ++j) regular += kernel.regular_node(k, j) * v[j];
    out[k] = singular + h * regular;
  }
  return Trajectory(grid, Placement::nodes, std::move(out));
}

Trajectory represent_solution(const RegularizedKernel& phi, const Trajectory& eta, const Grid& grid) {
  if (!(phi.grid() == grid)) throw std::invalid_argument("resolvent built on a different grid");
  Trajectory y = integrate_kernel(phi, eta);
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += eta[k];
  return y;
}

double resolvent_residual(const RegularizedKernel& kernel, const KernelCoefficient& a_coefficient) {
  const Grid& grid = kernel.grid();
  const int n = grid.cells();
  const double alpha = kernel.alpha();
  const SplitCellRule split(alpha, grid);
  const SingularWeights w(alpha, grid);

  RowMatrix a_quarter = RowMatrix::Zero(n + 1, 2 * n);
  RowMatrix a_mid = RowMatrix::Zero(n + 1, n);
  for (int k = 1; k <= n; ++k) {
    for (int q = 0; q < 2 * k; ++q) a_quarter(k, q) = a_coefficient(grid.node(k), quarter_point(grid, q));
    for (int m = 0; m < k; ++m) a_mid(k, m) = a_coefficient(grid.node(k), grid.midpoint(m));
  }
  RowMatrix c_quarter = RowMatrix::Zero(n + 1, 2 * n);  // coefficient(quarter q, t_j)
  RowMatrix r_mid = RowMatrix::Zero(n + 1, n);          // R(tau_m, t_j), m >= j
  for (int j = 0; j < n; ++j) {
    for (int q = 2 * j; q < 2 * n; ++q) c_quarter(j, q) = kernel.coefficient(quarter_point(grid, q), grid.node(j));
    for (int m = j; m < n; ++m) r_mid(j, m) = kernel.regular(grid.midpoint(m), grid.node(j));
  }

  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k <= n; ++k) {
      const int d = k - j;
      double rhs = 0.0;
      for (int p = 0; p < d; ++p) {
        const int m = j + p;
        rhs += split.left(p, d) * a_quarter(k, 2 * m) * c_quarter(j, 2 * m) +
               split.right(p, d) * a_quarter(k, 2 * m + 1) * c_quarter(j, 2 * m + 1);
        rhs += a_mid(k, m) * w.by_offset(k - m) * r_mid(j, m);
      }
      const double r = kernel.regular_node(k, j);
      const double full =
          std::abs(r) + std::abs(kernel.coefficient(grid.node(k), grid.node(j))) * std::pow(d * grid.step(), alpha - 1.0);
      worst = std::max(worst, std::abs(r - rhs) / (1.0 + full));
    }
  }
  return worst;
}

}  // namespace svoc
