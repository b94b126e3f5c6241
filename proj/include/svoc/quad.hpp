#ifndef SVOC_QUAD_HPP_
#define SVOC_QUAD_HPP_

#include <span>
#include <vector>

namespace svoc {

/// Uniform grid on [0, T] with N cells: nodes t_k = k T/N, midpoints (k + 1/2) T/N.
class Grid {
 public:
  Grid(double horizon, int cells);

  double horizon() const { return horizon_; }
  int cells() const { return cells_; }
  double step() const { return step_; }

  double node(int k) const { return k == cells_ ? horizon_ : k * step_; }
  double midpoint(int k) const { return (k + 0.5) * step_; }
  std::vector<double> nodes() const;
  std::vector<double> midpoints() const;

  // Index of the node closest to t (ties resolve to the lower index).
  int nearest_node(double t) const;

  bool operator==(const Grid& other) const = default;

 private:
  double horizon_;
  int cells_;
  double step_;
};

/// Throws std::invalid_argument when N < 2 or T <= 0.
Grid make_grid(double horizon, int cells);

/// \f$ \int_a^b x^{\alpha-1} dx = (b^\alpha - a^\alpha)/\alpha \f$ for 0 <= a <= b,
/// evaluated without cancellation when b - a is small relative to b.
double power_integral(double alpha, double a, double b);

/// Left-rectangle product-integration weights
///   w[k][j] = ((t_k - t_j)^a - (t_k - t_{j+1})^a) / a,  0 <= j < k <= N,
/// i.e. the exact integral of (t_k - s)^(a-1) over cell j. On a uniform grid
/// the table depends on k - j only and is stored that way.
class SingularWeights {
 public:
  SingularWeights(double alpha, const Grid& grid);

  double alpha() const { return alpha_; }
  const Grid& grid() const { return grid_; }

  double operator()(int k, int j) const;
  // Weight for a cell whose far edge lies `offset` cells from the target.
  double by_offset(int offset) const { return by_offset_[offset]; }
  double row_sum(int k) const;

 private:
  double alpha_;
  Grid grid_;
  std::vector<double> by_offset_;  // index d = k - j in 1..N
};

/// Throws std::invalid_argument unless 0 < alpha < 1.
SingularWeights singular_weights(double alpha, const Grid& grid);

/// Sum_{j<k} w[k][j] values[j]: product rectangle rule for
/// int_0^{t_k} values(s) (t_k - s)^(a-1) ds. `values` holds node samples.
double singular_integral(std::span<const double> values, const SingularWeights& weights, int k);

/// Product weights from a midpoint target tau_k to whole cells.
///   offset 0:  the half cell between tau_k and the adjacent node, (h/2)^a / a
///   offset e:  the cell whose near edge is (e - 1/2) h away.
/// The same table serves left-sided integrals int_0^{tau_k} (cells j <= k,
/// offset k - j) and mirrored right-sided ones int_{tau_k}^T (cells j >= k,
/// offset j - k). Right-sided row sums equal (T - tau_k)^a / a.
class MidpointWeights {
 public:
  MidpointWeights(double alpha, const Grid& grid);

  double alpha() const { return alpha_; }
  const Grid& grid() const { return grid_; }
  double by_offset(int offset) const { return by_offset_[offset]; }
  double right(int k, int j) const { return by_offset_[j - k]; }
  double left(int k, int j) const { return by_offset_[k - j]; }
  double right_row_sum(int k) const;

 private:
  double alpha_;
  Grid grid_;
  std::vector<double> by_offset_;  // offsets 0..N-1
};

/// Product-trapezoid weights: piecewise-linear data against (t_k - s)^(a-1).
/// For the cell [t_j, t_{j+1}] with d = k - j, `start(d)` multiplies the value
/// at t_j and `end(d)` the value at t_{j+1}.
class TrapezoidWeights {
 public:
  TrapezoidWeights(double alpha, const Grid& grid);
  double start(int offset) const { return start_[offset]; }
  double end(int offset) const { return end_[offset]; }

 private:
  std::vector<double> start_;
  std::vector<double> end_;
};

}  // namespace svoc

#endif  // SVOC_QUAD_HPP_
