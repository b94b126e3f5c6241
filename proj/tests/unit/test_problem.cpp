#include <filesystem>
#include <fstream>

#include "../support/derivative_check.hpp"
#include "doctest.h"
#include "svoc/errors.hpp"
#include "svoc/problem.hpp"

using namespace svoc;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  const fs::path dir = fs::temp_directory_path() / "svoc_test_problem";
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST_CASE("paper_example builtin") {
  const ProblemSpec spec = builtin_problem("paper_example");
  CHECK(spec.alpha == 0.5);
  CHECK(spec.horizon == 1.0);
  REQUIRE(spec.instant_costs.size() == 1);
  CHECK(spec.instant_costs[0].time == 1.0);
  REQUIRE(spec.control_bounds.has_value());
  const Problem p(spec);
  CHECK(p.f(Partial::value, 1.0, 0.25, 1.0, 1.0) == 1.0);
  CHECK(p.eta(1.0) == 2.0);
  CHECK(p.eta(0.25) == doctest::Approx(1.125));
  CHECK(p.g(Partial::u, 0.3, 2.0, 5.0) == 2.0);
  CHECK(p.h(0, Partial::y, 7.0) == 1.0);
  CHECK(p.h(0, Partial::yy, 7.0) == 0.0);
}

TEST_CASE("parametrised builtins") {
  const Problem abel(builtin_problem("abel_linear", {{"lambda", 0.0}}));
  CHECK(abel.f(Partial::value, 1, 0, 3, 0) == 0.0);
  CHECK(abel.instant_count() == 0);

  const Problem sq(builtin_problem("sing_quad", {{"c", 1.0}}));
  CHECK(sq.f(Partial::uu, 0.5, 0.1, 1, 0) == 2.0);
  CHECK(sq.f(Partial::u, 0.5, 0.1, 1, 0) == 0.0);
  CHECK(sq.g(Partial::y, 0.5, 1, 0) == 2.0);

  const Problem lq(builtin_problem("lq", {{"a", 0.5}, {"b", 1.0}, {"r", 2.0}, {"alpha", 0.3}, {"T", 2.0}}));
  CHECK(lq.alpha() == 0.3);
  CHECK(lq.horizon() == 2.0);
  CHECK(lq.f(Partial::y, 1, 0, 0, 0) == 0.5);
  CHECK(lq.g(Partial::uu, 1, 0, 0) == 4.0);
}

TEST_CASE("builtin errors") {
  CHECK_THROWS_AS(builtin_problem("nope"), ProblemError);
  CHECK_THROWS_WITH_AS(builtin_problem("sing_quad"), doctest::Contains("requires parameter 'c'"), ProblemError);
  CHECK_THROWS_AS(builtin_problem("sing_quad", {{"c", 1}, {"d", 2}}), ProblemError);
  CHECK_THROWS_WITH_AS(builtin_problem("lq", {{"a", 1}, {"b", 1}, {"r", 1}, {"alpha", 1.5}}),
                       doctest::Contains("alpha out of range"), ProblemError);
}

TEST_CASE("validation rules") {
  ProblemSpec spec = builtin_problem("paper_example");
  spec.horizon = 0.0;
  CHECK_THROWS_AS(validate(spec), ProblemError);

  spec = builtin_problem("paper_example");
  spec.eta = parse_expression("y");
  CHECK_THROWS_WITH_AS(validate(spec), doctest::Contains("eta"), ProblemError);

  spec = builtin_problem("paper_example");
  spec.g = parse_expression("s*y");
  CHECK_THROWS_AS(validate(spec), ProblemError);

  spec = builtin_problem("paper_example");
  spec.instant_costs.push_back({0.5, parse_expression("y")});
  CHECK_THROWS_WITH_AS(validate(spec), doctest::Contains("increasing"), ProblemError);

  spec = builtin_problem("paper_example");
  spec.instant_costs[0].time = 1.5;
  CHECK_THROWS_AS(validate(spec), ProblemError);

  spec = builtin_problem("paper_example");
  spec.control_bounds = ControlBounds{1.0, -1.0};
  CHECK_THROWS_AS(validate(spec), ProblemError);
}

TEST_CASE("problem files") {
  const ProblemSpec builtin = builtin_problem("paper_example");
  const fs::path path = temp_file("example.json", problem_to_json(builtin).dump(2));
  const Problem loaded = load_problem_file(path);
  CHECK(problem_to_json(loaded.spec()) == problem_to_json(builtin));
  const Problem reference(builtin);
  for (double t : {0.1, 0.5, 0.9}) {
    CHECK(loaded.eta(t) == reference.eta(t));
    CHECK(loaded.f(Partial::value, t, 0.5 * t, 1.3, -0.4) == reference.f(Partial::value, t, 0.5 * t, 1.3, -0.4));
  }

  const fs::path bad_alpha =
      temp_file("alpha.json", R"({"alpha": 1.5, "T": 1, "eta": "1", "f": "u", "g": "y"})");
  CHECK_THROWS_WITH_AS(load_problem_file(bad_alpha), doctest::Contains("alpha out of range"), ProblemError);

  const fs::path off_grid = temp_file(
      "offgrid.json",
      R"({"alpha": 0.5, "T": 1, "eta": "1", "f": "u", "g": "y", "instant_costs": [{"t": 0.5, "h": "y^2"}]})");
  CHECK(load_problem_file(off_grid).instant_time(0) == 0.5);

  CHECK_THROWS_AS(load_problem_file(temp_file("junk.json", "{not json")), ProblemError);
  CHECK_THROWS_AS(load_problem_file(temp_file("extra.json", R"({"alpha": 0.5, "T": 1, "eta": "1", "f": "u",
      "g": "y", "colour": "red"})")),
                  ProblemError);
  CHECK_THROWS_AS(load_problem_file(temp_file("syntax.json", R"({"alpha": 0.5, "T": 1, "eta": "1+", "f": "u",
      "g": "y"})")),
                  ProblemError);
  CHECK_THROWS_AS(load_problem_file("/nonexistent/dir/problem.json"), IoError);
}

TEST_CASE("abs in a problem raises a warning") {
  ProblemSpec spec = builtin_problem("sing_quad", {{"c", 1}});
  spec.g = parse_expression("abs(y)");
  const Problem p(spec);
  CHECK(p.non_smooth());
  CHECK_FALSE(p.warnings().empty());
}

TEST_CASE("symbolic derivatives match central differences") {
  const Problem problems[] = {
      Problem(builtin_problem("paper_example")),
      Problem(builtin_problem("abel_linear", {{"lambda", 1.0}})),
      Problem(builtin_problem("sing_quad", {{"c", -1.0}})),
      Problem(builtin_problem("lq", {{"a", 0.5}, {"b", 1.0}, {"r", 0.3}})),
  };
  for (const Problem& p : problems) {
    CAPTURE(p.spec().name);
    const auto result = testing::check_derivatives(p, 100, 42);
    CHECK(result.worst <= 1e-6);
  }
}
