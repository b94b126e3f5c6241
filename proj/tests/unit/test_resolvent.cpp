#include <cmath>

#include "doctest.h"
#include "svoc/resolvent.hpp"

using namespace svoc;

namespace {

Trajectory constant(const Grid& g, double c) {
  return Trajectory::sample(g, Placement::nodes, [c](double) { return c; });
}

double relative_gap(const Trajectory& a, const Trajectory& b) {
  double diff = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) diff = std::max(diff, std::abs(a[k] - b[k]));
  return diff / std::max(a.sup_norm(), b.sup_norm());
}

// sum_{n>=2} (lambda Gamma(a))^n (t-s)^(n a - 1) / Gamma(n a): the regular part
// of the constant-coefficient resolvent.
double neumann_regular(double lambda, double alpha, double d, int terms) {
  double sum = 0.0;
  for (int n = 2; n <= terms; ++n) {
    sum += std::exp(n * std::log(lambda * std::tgamma(alpha)) + (n * alpha - 1) * std::log(d) - std::lgamma(n * alpha));
  }
  return sum;
}

}  // namespace

TEST_CASE("zero coefficient gives the zero kernel") {
  const Grid g(1.0, 32);
  const RegularizedKernel phi = build_resolvent([](double, double) { return 0.0; }, 0.5, g);
  CHECK(phi.is_zero());
  CHECK(phi.coefficient_is_zero());
  CHECK(phi.regular_table().isZero(0.0));
  const Trajectory eta = Trajectory::sample(g, Placement::nodes, [](double t) { return std::exp(t); });
  const Trajectory y = represent_solution(phi, eta, g);
  for (std::size_t k = 0; k < y.size(); ++k) CHECK(y[k] == eta[k]);
  CHECK(represent_solution(phi, constant(g, 0.0), g).sup_norm() == 0.0);
}

TEST_CASE("constant coefficient matches the Neumann series") {
  const double lambda = 0.5;
  const Grid g(1.0, 1024);
  const RegularizedKernel phi = build_resolvent([lambda](double, double) { return lambda; }, 0.5, g);
  CHECK(phi.coefficient(0.7, 0.2) == lambda);
  CHECK_FALSE(phi.is_zero());
  const double exact = neumann_regular(lambda, 0.5, 1.0, 30);
  CHECK(phi.regular_node(1024, 0) == doctest::Approx(exact).epsilon(1e-3));
  CHECK(phi.regular_node(512, 256) == doctest::Approx(neumann_regular(lambda, 0.5, 0.25, 30)).epsilon(1e-3));
  CHECK(phi.value(1.0, 0.0) == doctest::Approx(lambda + exact).epsilon(1e-3));
}

TEST_CASE("Neumann agreement for other exponents") {
  for (double alpha : {0.3, 0.7}) {
    const double lambda = alpha < 0.5 ? 0.3 : 1.0;
    const Grid g(1.0, 512);
    const RegularizedKernel phi = build_resolvent([lambda](double, double) { return lambda; }, alpha, g);
    CAPTURE(alpha);
    CHECK(phi.regular_node(512, 0) == doctest::Approx(neumann_regular(lambda, alpha, 1.0, 200)).epsilon(5e-3));
  }
}

TEST_CASE("resolvent representation agrees with the marched solution") {
  const Grid g(1.0, 1024);
  const Problem p(builtin_problem("abel_linear", {{"lambda", 0.5}}));
  const RegularizedKernel phi = build_resolvent([](double, double) { return 0.5; }, 0.5, g);
  const Trajectory eta = constant(g, 1.0);
  const Trajectory y_phi = represent_solution(phi, eta, g);
  const Trajectory y = solve_state(p, constant(g, 0.0), g);
  CHECK(relative_gap(y_phi, y) <= 1e-2);

  const Grid other(1.0, 512);
  CHECK_THROWS_AS(represent_solution(phi, constant(other, 1.0), other), std::invalid_argument);
}

TEST_CASE("resolvent identity residual") {
  const Grid g(1.0, 1024);
  auto a = [](double, double) { return 1.0; };
  const RegularizedKernel phi = build_resolvent(a, 0.5, g);
  CHECK(resolvent_residual(phi, a) <= 1e-3);

  auto varying = [](double t, double s) { return std::cos(t) * (1 + s); };
  const Grid small(2.0, 128);
  CHECK(resolvent_residual(build_resolvent(varying, 0.4, small), varying) <= 1e-3);
}

TEST_CASE("Q kernel in closed form when f_y vanishes") {
  const Problem p(builtin_problem("paper_example"));
  const Grid g(1.0, 64);
  const StatePair pair = solve_pair(p, constant(g, 0.0), g);
  const RegularizedKernel q = build_q_kernel(p, pair, g);
  CHECK(q.regular_table().isZero(0.0));
  for (int k = 1; k <= 64; k += 7) {
    for (int j = 0; j < k; j += 5) {
      const double t = g.node(k);
      const double s = g.node(j);
      const double exact = t * (1 + std::pow(s, 1.5)) / std::sqrt(t - s);
      CHECK(q.value(t, s) == doctest::Approx(exact).epsilon(1e-13));
    }
  }

  const Problem sq(builtin_problem("sing_quad", {{"c", 3.0}}));
  const StatePair sq_pair = solve_pair(sq, constant(g, 0.0), g);
  CHECK(build_q_kernel(sq, sq_pair, g).is_zero());
}

TEST_CASE("Q route and marched route for Y1 agree") {
  const Grid g(1.0, 1024);
  struct Case {
    ProblemSpec spec;
    double control;
  };
  const Case cases[] = {
      {builtin_problem("lq", {{"a", 0.5}, {"b", 1.0}, {"r", 0.0}}), 0.0},
      {builtin_problem("lq", {{"a", -1.0}, {"b", 2.0}, {"r", 1.0}}), 0.7},
      {builtin_problem("paper_example"), 0.5},
      {builtin_problem("sing_quad", {{"c", 1.0}}), 0.5},
  };
  const Trajectory v = Trajectory::sample(g, Placement::nodes, [](double t) { return 1 + std::sin(4 * t); });
  for (const Case& c : cases) {
    CAPTURE(c.spec.name);
    const Problem p(c.spec);
    const Trajectory u = Trajectory::sample(g, Placement::nodes, [&](double t) { return c.control * std::cos(t); });
    const StatePair pair = solve_pair(p, u, g);
    const RegularizedKernel q = build_q_kernel(p, pair, g);
    CHECK(relative_gap(integrate_kernel(q, v), solve_y1(p, pair, v, g)) <= 2e-2);
  }
}

TEST_CASE("cell integrals of the kernel") {
  const Grid g(1.0, 16);
  const RegularizedKernel phi = build_resolvent([](double, double) { return 1.5; }, 0.5, g);
  // Full cells below t: singular part exactly, regular part by the midpoint.
  const double t = g.node(10);
  double total = 0.0;
  for (int a = 0; a < 16; ++a) total += phi.cell_integral(t, a);
  double expected = 1.5 * power_integral(0.5, 0.0, t);
  for (int a = 0; a < 10; ++a) expected += phi.regular(t, g.midpoint(a)) * g.step();
  CHECK(total == doctest::Approx(expected).epsilon(1e-13));
  CHECK(phi.cell_integral(g.midpoint(3), 4) == 0.0);
  CHECK(phi.cell_integral(g.midpoint(3), 3) > 0.0);
}
