#include "svoc/state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "svoc/errors.hpp"

namespace svoc {

namespace {

std::size_t expected_size(const Grid& g, Placement p) {
  return p == Placement::nodes ? static_cast<std::size_t>(g.cells()) + 1 : static_cast<std::size_t>(g.cells());
}

void check_on_nodes(const Trajectory& x, const Grid& grid, const char* what) {
  if (x.placement != Placement::nodes || !(x.grid == grid)) {
    throw std::invalid_argument(std::string(what) + " must be sampled on the nodes of the solve grid");
  }
}

void guard(double value, int k, const char* what) {
  if (!std::isfinite(value) || std::abs(value) > kBlowUpBound) {
    throw NumericalError(std::string(what) + " blew up", k);
  }
}

constexpr double kNewtonTolerance = 1e-12;
constexpr int kNewtonIterations = 50;

// Marches x_k = sum_{i<k} W(k,i) [a(k,i) x_i + b(k,i)] (+ the implicit diagonal
// term under the trapezoid scheme). Shared by the linear variational equations.
template <typename Coef, typename Source>
Trajectory march_linear(const Problem& problem, const Grid& grid, Scheme scheme, Coef&& coef, Source&& source,
                        const char* what) {
  const int n = grid.cells();
  std::vector<double> x(n + 1, 0.0);
  if (scheme == Scheme::left_rectangle) {
    const SingularWeights w(problem.alpha(), grid);
    for (int k = 1; k <= n; ++k) {
      double sum = 0.0;
      for (int i = 0; i < k; ++i) sum += w.by_offset(k - i) * (coef(k, i) * x[i] + source(k, i));
      guard(sum, k, what);
      x[k] = sum;
    }
  } else {
    const TrapezoidWeights w(problem.alpha(), grid);
    for (int k = 1; k <= n; ++k) {
      double sum = 0.0;
      for (int i = 0; i < k; ++i) {
        const double c = w.start(k - i) + (i > 0 ? w.end(k - i + 1) : 0.0);
        sum += c * (coef(k, i) * x[i] + source(k, i));
      }
      const double diag = 1.0 - w.end(1) * coef(k, k);
      if (diag == 0.0) throw NumericalError(std::string(what) + ": singular implicit step", k);
      x[k] = (sum + w.end(1) * source(k, k)) / diag;
      guard(x[k], k, what);
    }
  }
  return Trajectory(grid, Placement::nodes, std::move(x));
}

}  // namespace

// ------------------------------------------------------------- Trajectory

Trajectory::Trajectory(const Grid& g, Placement p, std::vector<double> v)
    : grid(g), placement(p), values(std::move(v)) {
  if (values.size() != expected_size(grid, placement)) {
    throw std::invalid_argument("trajectory length does not match its grid placement");
  }
}

Trajectory Trajectory::zeros(const Grid& g, Placement p) {
  return Trajectory(g, p, std::vector<double>(expected_size(g, p), 0.0));
}

Trajectory Trajectory::sample(const Grid& g, Placement p, const std::function<double(double)>& fn) {
  std::vector<double> v(expected_size(g, p));
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = fn(p == Placement::nodes ? g.node(static_cast<int>(i)) : g.midpoint(static_cast<int>(i)));
  }
  return Trajectory(g, p, std::move(v));
}

Trajectory Trajectory::sample(const Grid& g, Placement p, const ScalarExpr& expr_in_t) {
  if (expr_in_t.variables() & ~var_bit(Var::t)) throw ProblemError("expected an expression in t only");
  const CompiledExpr code(expr_in_t);
  return sample(g, p, [&](double t) { return code({t, 0.0, 0.0, 0.0}); });
}

double Trajectory::time(std::size_t i) const {
  return placement == Placement::nodes ? grid.node(static_cast<int>(i)) : grid.midpoint(static_cast<int>(i));
}

double Trajectory::sup_norm() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double Trajectory::at(double t) const {
  const double offset = placement == Placement::nodes ? 0.0 : 0.5;
  const double x = t / grid.step() - offset;
  const int last = static_cast<int>(values.size()) - 1;
  if (x <= 0.0) return values.front();
  if (x >= last) return values.back();
  const int i = std::min(static_cast<int>(x), last - 1);
  const double frac = x - i;
  return values[i] + frac * (values[i + 1] - values[i]);
}

Trajectory Trajectory::to_midpoints() const {
  if (placement != Placement::nodes) throw std::invalid_argument("to_midpoints expects a node trajectory");
  std::vector<double> mid(grid.cells());
  for (int k = 0; k < grid.cells(); ++k) mid[k] = 0.5 * (values[k] + values[k + 1]);
  return Trajectory(grid, Placement::midpoints, std::move(mid));
}

// ----------------------------------------------------------------- solvers

Trajectory solve_state(const Problem& problem, const Trajectory& control, const Grid& grid, Scheme scheme) {
  check_on_nodes(control, grid, "control");
  for (std::size_t i = 0; i < control.size(); ++i) {
    if (!std::isfinite(control[i])) throw NumericalError("control is not finite", static_cast<long>(i));
  }
  const int n = grid.cells();
  std::vector<double> y(n + 1, 0.0);
  y[0] = problem.eta(0.0);
  guard(y[0], 0, "state");

  if (scheme == Scheme::left_rectangle) {
    const SingularWeights w(problem.alpha(), grid);
    for (int k = 1; k <= n; ++k) {
      const double tk = grid.node(k);
      double sum = problem.eta(tk);
      for (int j = 0; j < k; ++j) {
        sum += w.by_offset(k - j) * problem.f(Partial::value, tk, grid.node(j), y[j], control[j]);
      }
      guard(sum, k, "state");
      y[k] = sum;
    }
    return Trajectory(grid, Placement::nodes, std::move(y));
  }

  const TrapezoidWeights w(problem.alpha(), grid);
  for (int k = 1; k <= n; ++k) {
    const double tk = grid.node(k);
    double rest = problem.eta(tk);
    for (int i = 0; i < k; ++i) {
      const double c = w.start(k - i) + (i > 0 ? w.end(k - i + 1) : 0.0);
      rest += c * problem.f(Partial::value, tk, grid.node(i), y[i], control[i]);
    }
    const double wd = w.end(1);
    double x = y[k - 1];
    bool converged = false;
    for (int it = 0; it < kNewtonIterations; ++it) {
      const double residual = x - rest - wd * problem.f(Partial::value, tk, tk, x, control[k]);
      const double slope = 1.0 - wd * problem.f(Partial::y, tk, tk, x, control[k]);
      if (slope == 0.0 || !std::isfinite(slope)) break;
      const double step = residual / slope;
      x -= step;
      if (std::abs(step) <= kNewtonTolerance * (1.0 + std::abs(x))) {
        converged = true;
        break;
      }
    }
    if (!converged) throw NumericalError("implicit trapezoid step did not converge", k);
    guard(x, k, "state");
    y[k] = x;
  }
  return Trajectory(grid, Placement::nodes, std::move(y));
}

StatePair solve_pair(const Problem& problem, const Trajectory& control, const Grid& grid, Scheme scheme) {
  return {solve_state(problem, control, grid, scheme), control};
}

CostBreakdown evaluate_cost(const Problem& problem, const Trajectory& y, const Trajectory& u, const Grid& grid) {
  check_on_nodes(y, grid, "state");
  check_on_nodes(u, grid, "control");
  const int n = grid.cells();
  const double h = grid.step();
  CostBreakdown cost;
  for (int k = 0; k <= n; ++k) {
    const double weight = (k == 0 || k == n) ? 0.5 * h : h;
    cost.running += weight * problem.g(Partial::value, grid.node(k), y[k], u[k]);
  }
  cost.total = cost.running;
  for (std::size_t i = 0; i < problem.instant_count(); ++i) {
    const double ti = problem.instant_time(i);
    if (!(ti >= 0.0 && ti <= grid.horizon() * (1.0 + 1e-14))) throw ProblemError("instant time outside [0, T]");
    const double value = problem.h(i, Partial::value, y.at(ti));
    cost.instants.push_back(value);
    cost.total += value;
  }
  return cost;
}

Trajectory solve_y1(const Problem& problem, const StatePair& pair, const Trajectory& v, const Grid& grid,
                    Scheme scheme) {
  check_on_nodes(pair.y, grid, "reference state");
  check_on_nodes(v, grid, "variation");
  auto args = [&](int k, int i, Partial p) {
    return problem.f(p, grid.node(k), grid.node(i), pair.y[i], pair.u[i]);
  };
  return march_linear(
      problem, grid, scheme, [&](int k, int i) { return args(k, i, Partial::y); },
      [&](int k, int i) { return args(k, i, Partial::u) * v[i]; }, "Y1");
}

Trajectory solve_y2(const Problem& problem, const StatePair& pair, const Trajectory& v, const Trajectory& y1,
                    const Grid& grid, Scheme scheme) {
  check_on_nodes(pair.y, grid, "reference state");
  check_on_nodes(v, grid, "variation");
  check_on_nodes(y1, grid, "Y1");
  auto args = [&](int k, int i, Partial p) {
    return problem.f(p, grid.node(k), grid.node(i), pair.y[i], pair.u[i]);
  };
  return march_linear(
      problem, grid, scheme, [&](int k, int i) { return args(k, i, Partial::y); },
      [&](int k, int i) {
        return args(k, i, Partial::yy) * y1[i] * y1[i] + 2.0 * args(k, i, Partial::yu) * y1[i] * v[i] +
               args(k, i, Partial::uu) * v[i] * v[i];
      },
      "Y2");
}

}  // namespace svoc
