#ifndef SVOC_PROBLEM_HPP_
#define SVOC_PROBLEM_HPP_

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "svoc/expr.hpp"

namespace svoc {

struct InstantCost {
  double time = 0.0;
  ScalarExpr h;  // in y only
};

struct ControlBounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// y(t) = eta(t) + int_0^t f(t, s, y(s), u(s)) (t - s)^(alpha-1) ds,
/// J(u) = int_0^T g(t, y, u) dt + sum_i h_i(y(t_i)).
struct ProblemSpec {
  std::string name = "custom";
  std::map<std::string, double> params;
  double alpha = 0.5;
  double horizon = 1.0;
  ScalarExpr eta;  // in t
  ScalarExpr f;    // in t, s, y, u
  ScalarExpr g;    // in t, y, u
  std::vector<InstantCost> instant_costs;
  std::optional<ControlBounds> control_bounds;
};

/// Throws ProblemError on the first violated invariant.
void validate(const ProblemSpec& spec);

/// Index into a Partials table.
enum class Partial : int { value = 0, y, u, yy, yu, uu };
inline constexpr int kPartialCount = 6;

/// A function of (t, s, y, u) with its symbolic partials in (y, u) to second order.
struct Partials {
  std::array<ScalarExpr, kPartialCount> exprs;
  std::array<CompiledExpr, kPartialCount> code;

  static Partials of(const ScalarExpr& e, DiffDiagnostics* diagnostics = nullptr);
  double operator()(Partial p, const Point& x) const { return code[static_cast<int>(p)](x); }
  const ScalarExpr& expr(Partial p) const { return exprs[static_cast<int>(p)]; }
  bool is_zero(Partial p) const { return code[static_cast<int>(p)].is_zero(); }
};

struct DerivativeBundle {
  Partials f;
  Partials g;
  std::vector<Partials> h;  // one per instant cost; only value, y, yy are non-trivial
};

/// A validated problem with compiled derivatives. Immutable once built.
class Problem {
 public:
  explicit Problem(ProblemSpec spec);

  const ProblemSpec& spec() const { return spec_; }
  const DerivativeBundle& derivatives() const { return derivs_; }
  double alpha() const { return spec_.alpha; }
  double horizon() const { return spec_.horizon; }
  std::size_t instant_count() const { return spec_.instant_costs.size(); }
  double instant_time(std::size_t i) const { return spec_.instant_costs[i].time; }

  double eta(double t) const { return eta_({t, 0.0, 0.0, 0.0}); }
  double f(Partial p, double t, double s, double y, double u) const { return derivs_.f(p, {t, s, y, u}); }
  double g(Partial p, double t, double y, double u) const { return derivs_.g(p, {t, 0.0, y, u}); }
  double h(std::size_t i, Partial p, double y) const { return derivs_.h[i](p, {0.0, 0.0, y, 0.0}); }

  // True when some derivative went through abs(); see DiffDiagnostics.
  bool non_smooth() const { return non_smooth_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  ProblemSpec spec_;
  CompiledExpr eta_;
  DerivativeBundle derivs_;
  bool non_smooth_ = false;
  std::vector<std::string> warnings_;
};

struct BuiltinInfo {
  std::string name;
  std::vector<std::string> required;
  std::string summary;
};

const std::vector<BuiltinInfo>& builtin_registry();

/// paper_example, abel_linear(lambda), sing_quad(c), lq(a, b, r). Every builtin
/// also accepts optional `alpha` and `T`. Throws ProblemError on an unknown
/// name, a missing required parameter or an unrecognised one.
ProblemSpec builtin_problem(std::string_view name, const std::map<std::string, double>& params = {});

ProblemSpec problem_from_json(const nlohmann::json& doc);
nlohmann::ordered_json problem_to_json(const ProblemSpec& spec);

/// Reads the JSON problem-file format. IoError when the file cannot be read,
/// ProblemError on schema or invariant violations.
Problem load_problem_file(const std::filesystem::path& path);

}  // namespace svoc

#endif  // SVOC_PROBLEM_HPP_
