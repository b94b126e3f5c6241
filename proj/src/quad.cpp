#include "svoc/quad.hpp"

#include <cmath>
#include <stdexcept>

namespace svoc {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha out of range (0, 1)");
}

}  // namespace

Grid::Grid(double horizon, int cells) : horizon_(horizon), cells_(cells), step_(horizon / cells) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("grid horizon must be positive");
  if (cells < 2) throw std::invalid_argument("grid needs at least 2 cells");
}

std::vector<double> Grid::nodes() const {
  std::vector<double> out(cells_ + 1);
  for (int k = 0; k <= cells_; ++k) out[k] = node(k);
  return out;
}

std::vector<double> Grid::midpoints() const {
  std::vector<double> out(cells_);
  for (int k = 0; k < cells_; ++k) out[k] = midpoint(k);
  return out;
}

int Grid::nearest_node(double t) const {
  const double x = t / step_;
  int k = static_cast<int>(std::floor(x));
  if (x - k > 0.5) ++k;
  if (k < 0) return 0;
  if (k > cells_) return cells_;
  return k;
}

Grid make_grid(double horizon, int cells) { return Grid(horizon, cells); }

double power_integral(double alpha, double a, double b) {
  if (b <= 0.0) return 0.0;
  const double b_pow = std::pow(b, alpha);
  if (a <= 0.0) return b_pow / alpha;
  // b^a (1 - (a/b)^a) / a, with the bracket from expm1/log1p.
  return -b_pow * std::expm1(alpha * std::log1p(-(b - a) / b)) / alpha;
}

SingularWeights::SingularWeights(double alpha, const Grid& grid)
    : alpha_(alpha), grid_(grid), by_offset_(grid.cells() + 1, 0.0) {
  check_alpha(alpha);
  const double scale = std::pow(grid.step(), alpha);
  for (int d = 1; d <= grid.cells(); ++d) by_offset_[d] = scale * power_integral(alpha, d - 1.0, d);
}

double SingularWeights::operator()(int k, int j) const {
  if (j < 0 || j >= k || k > grid_.cells()) throw std::out_of_range("singular weight index out of range");
  return by_offset_[k - j];
}

double SingularWeights::row_sum(int k) const {
  double sum = 0.0;
  for (int d = k; d >= 1; --d) sum += by_offset_[d];
  return sum;
}

SingularWeights singular_weights(double alpha, const Grid& grid) { return SingularWeights(alpha, grid); }

double singular_integral(std::span<const double> values, const SingularWeights& weights, int k) {
  if (k < 0 || k > weights.grid().cells()) throw std::out_of_range("singular_integral row out of range");
  if (values.size() < static_cast<std::size_t>(k)) throw std::out_of_range("singular_integral needs k values");
  double sum = 0.0;
  for (int j = 0; j < k; ++j) sum += weights.by_offset(k - j) * values[j];
  return sum;
}

MidpointWeights::MidpointWeights(double alpha, const Grid& grid)
    : alpha_(alpha), grid_(grid), by_offset_(grid.cells(), 0.0) {
  check_alpha(alpha);
  const double scale = std::pow(grid.step(), alpha);
  by_offset_[0] = scale * power_integral(alpha, 0.0, 0.5);
  for (int e = 1; e < grid.cells(); ++e) by_offset_[e] = scale * power_integral(alpha, e - 0.5, e + 0.5);
}

double MidpointWeights::right_row_sum(int k) const {
  double sum = 0.0;
  for (int e = grid_.cells() - 1 - k; e >= 0; --e) sum += by_offset_[e];
  return sum;
}

TrapezoidWeights::TrapezoidWeights(double alpha, const Grid& grid)
    : start_(grid.cells() + 1, 0.0), end_(grid.cells() + 1, 0.0) {
  check_alpha(alpha);
  const double h = grid.step();
  const double scale = std::pow(h, alpha);
  for (int d = 1; d <= grid.cells(); ++d) {
    // In units of h: x in [a, b] = [d-1, d] is the distance t_k - s.
    const double a = d - 1.0;
    const double b = d;
    const double m0 = power_integral(alpha, a, b);                                    // int x^(a-1)
    const double m1 = (std::pow(b, alpha + 1.0) - std::pow(a, alpha + 1.0)) / (alpha + 1.0);  // int x^a
    start_[d] = scale * (m1 - a * m0);  // weight of the value at x = b (s = t_j)
    end_[d] = scale * (b * m0 - m1);    // weight of the value at x = a (s = t_{j+1})
  }
}

}  // namespace svoc
