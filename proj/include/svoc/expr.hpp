#ifndef SVOC_EXPR_HPP_
#define SVOC_EXPR_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace svoc {

/// Independent variables an expression may reference.
enum class Var : std::uint8_t { t = 0, s = 1, y = 2, u = 3 };

/// Bit mask over Var, bit i set when variable i occurs.
using VarMask = std::uint8_t;
constexpr VarMask var_bit(Var v) { return static_cast<VarMask>(1u << static_cast<unsigned>(v)); }

enum class BinaryOp : std::uint8_t { add, sub, mul, div, pow };

// `sign` is produced by differentiating `abs`; it is also accepted by the parser.
enum class Func : std::uint8_t { sqrt, exp, log, sin, cos, abs, sign };

/// Evaluation point (t, s, y, u). Unused coordinates are ignored.
struct Point {
  double t = 0.0;
  double s = 0.0;
  double y = 0.0;
  double u = 0.0;
};

namespace detail {
struct Node;
}

/// Immutable scalar expression tree. Copies share structure.
class ScalarExpr {
 public:
  ScalarExpr();  // the literal 0

  static ScalarExpr constant(double value);
  static ScalarExpr variable(Var v);

  double evaluate(const Point& p) const;
  bool is_constant() const;
  // Only meaningful when is_constant().
  double constant_value() const;
  VarMask variables() const;

  /// Infix text that parse_expression() maps back to an evaluation-identical tree.
  std::string to_string() const;

  const detail::Node& node() const { return *node_; }
  const std::shared_ptr<const detail::Node>& ptr() const { return node_; }
  explicit ScalarExpr(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<const detail::Node> node_;
};

namespace detail {
struct Node {
  enum class Kind : std::uint8_t { constant, variable, negate, binary, call };
  Kind kind = Kind::constant;
  double value = 0.0;
  Var var = Var::t;
  BinaryOp op = BinaryOp::add;
  Func func = Func::sqrt;
  std::shared_ptr<const Node> lhs;  // operand of negate/call, left operand of binary
  std::shared_ptr<const Node> rhs;
};
}  // namespace detail

// Folding constructors: literal subtrees collapse, and identities such as
// x+0, x*1, x*0, x^1 are simplified away.
ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator-(const ScalarExpr& a);
ScalarExpr pow(const ScalarExpr& base, const ScalarExpr& exponent);
ScalarExpr call(Func f, const ScalarExpr& arg);

/// Parses infix text over t, s, y, u, numeric literals, `pi`, the operators
/// + - * / ^ (right-associative) and sqrt, exp, log, sin, cos, abs, sign.
/// Throws ParseError on malformed input, unknown identifiers and arity mismatches.
ScalarExpr parse_expression(std::string_view text);

struct DiffDiagnostics {
  // Set when the derivative passed through abs(): the result contains sign(),
  // which is discontinuous where the abs argument vanishes.
  bool non_smooth = false;
};

/// Symbolic partial derivative with constant folding.
ScalarExpr differentiate(const ScalarExpr& e, Var var, DiffDiagnostics* diagnostics = nullptr);

std::string_view var_name(Var v);
std::string_view func_name(Func f);

/// Flattened postfix form of a ScalarExpr; several times faster to evaluate
/// than walking the tree, which matters inside the O(N^2) marching loops.
class CompiledExpr {
 public:
  static constexpr std::size_t kMaxStack = 64;

  CompiledExpr() = default;
  explicit CompiledExpr(const ScalarExpr& e);

  double operator()(const Point& p) const;
  double operator()(double t, double s, double y, double u) const { return (*this)({t, s, y, u}); }

  bool is_constant() const { return constant_; }
  bool is_zero() const { return constant_ && constant_value_ == 0.0; }

 private:
  enum class OpCode : std::uint8_t { push, load, neg, add, sub, mul, div, pow, call };
  struct Instr {
    OpCode code;
    std::uint8_t index;  // Var or Func
    double value;
  };
  void emit(const detail::Node& n, std::size_t& depth, std::size_t& max_depth);

  std::vector<Instr> code_;
  bool constant_ = true;
  double constant_value_ = 0.0;
};

}  // namespace svoc

#endif  // SVOC_EXPR_HPP_
