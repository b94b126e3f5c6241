#ifndef SVOC_STATE_HPP_
#define SVOC_STATE_HPP_

#include <functional>
#include <span>
#include <vector>

#include "svoc/expr.hpp"
#include "svoc/problem.hpp"
#include "svoc/quad.hpp"

namespace svoc {

enum class Placement { nodes, midpoints };

/// Samples of a scalar function on a grid, at nodes (N+1 values) or at
/// cell midpoints (N values).
struct Trajectory {
  Grid grid;
  Placement placement = Placement::nodes;
  std::vector<double> values;

  Trajectory(const Grid& g, Placement p, std::vector<double> v);
  static Trajectory zeros(const Grid& g, Placement p);
  static Trajectory sample(const Grid& g, Placement p, const std::function<double(double)>& fn);
  // Samples an expression in t.
  static Trajectory sample(const Grid& g, Placement p, const ScalarExpr& expr_in_t);

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  double time(std::size_t i) const;
  double sup_norm() const;

  // Piecewise-linear interpolation, constant beyond the first/last sample.
  double at(double t) const;
  // Node trajectory -> midpoint averages.
  Trajectory to_midpoints() const;
};

/// Reference pair (y*, u*) on nodes.
struct StatePair {
  Trajectory y;
  Trajectory u;
};

enum class Scheme { left_rectangle, product_trapezoid };

struct CostBreakdown {
  double running = 0.0;
  std::vector<double> instants;
  double total = 0.0;
};

inline constexpr double kBlowUpBound = 1e12;

/// Marches y_k = eta(t_k) + sum_{j<k} w[k][j] f(t_k, t_j, y_j, u_j) from y_0 = eta(0).
/// With Scheme::product_trapezoid the diagonal term makes each step implicit and
/// is resolved by scalar Newton iteration. Throws NumericalError on blow-up.
Trajectory solve_state(const Problem& problem, const Trajectory& control, const Grid& grid,
                       Scheme scheme = Scheme::left_rectangle);

StatePair solve_pair(const Problem& problem, const Trajectory& control, const Grid& grid,
                     Scheme scheme = Scheme::left_rectangle);

/// Running cost by the trapezoid rule on nodes; y(t_i) by linear interpolation.
CostBreakdown evaluate_cost(const Problem& problem, const Trajectory& y, const Trajectory& u, const Grid& grid);

/// First-order variation: Y1 = K[f_y Y1 + f_u v] with the state's weights, Y1(0) = 0.
Trajectory solve_y1(const Problem& problem, const StatePair& pair, const Trajectory& v, const Grid& grid,
                    Scheme scheme = Scheme::left_rectangle);

/// Second-order variation with sources f_yy Y1^2 + 2 f_yu Y1 v + f_uu v^2.
Trajectory solve_y2(const Problem& problem, const StatePair& pair, const Trajectory& v, const Trajectory& y1,
                    const Grid& grid, Scheme scheme = Scheme::left_rectangle);

}  // namespace svoc

#endif  // SVOC_STATE_HPP_
