#include "svoc/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "svoc/errors.hpp"

namespace svoc {

using detail::Node;
using NodePtr = std::shared_ptr<const Node>;

namespace {

NodePtr make_constant(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::constant;
  n->value = v;
  return n;
}

NodePtr make_variable(Var v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::variable;
  n->var = v;
  return n;
}

NodePtr make_raw_binary(BinaryOp op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::binary;
  n->op = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

bool is_const(const Node& n) { return n.kind == Node::Kind::constant; }
bool is_value(const Node& n, double v) { return is_const(n) && n.value == v; }

double apply_func(Func f, double x) {
  switch (f) {
    case Func::sqrt: return std::sqrt(x);
    case Func::exp: return std::exp(x);
    case Func::log: return std::log(x);
    case Func::sin: return std::sin(x);
    case Func::cos: return std::cos(x);
    case Func::abs: return std::abs(x);
    case Func::sign: return static_cast<double>((x > 0.0) - (x < 0.0));
  }
  return 0.0;
}

double apply_binary(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::add: return a + b;
    case BinaryOp::sub: return a - b;
    case BinaryOp::mul: return a * b;
    case BinaryOp::div: return a / b;
    case BinaryOp::pow: return std::pow(a, b);
  }
  return 0.0;
}

double eval_node(const Node& n, const Point& p) {
  switch (n.kind) {
    case Node::Kind::constant: return n.value;
    case Node::Kind::variable:
      switch (n.var) {
        case Var::t: return p.t;
        case Var::s: return p.s;
        case Var::y: return p.y;
        case Var::u: return p.u;
      }
      return 0.0;
    case Node::Kind::negate: return -eval_node(*n.lhs, p);
    case Node::Kind::binary: return apply_binary(n.op, eval_node(*n.lhs, p), eval_node(*n.rhs, p));
    case Node::Kind::call: return apply_func(n.func, eval_node(*n.lhs, p));
  }
  return 0.0;
}

VarMask collect_vars(const Node& n) {
  switch (n.kind) {
    case Node::Kind::constant: return 0;
    case Node::Kind::variable: return var_bit(n.var);
    case Node::Kind::negate:
    case Node::Kind::call: return collect_vars(*n.lhs);
    case Node::Kind::binary: return static_cast<VarMask>(collect_vars(*n.lhs) | collect_vars(*n.rhs));
  }
  return 0;
}

// ---------------------------------------------------------------- printing

// Binding strength used both by the printer and to decide on parentheses.
enum Prec : int { kAdd = 1, kMul = 2, kUnary = 3, kPow = 4, kAtom = 5 };

int precedence(const Node& n) {
  switch (n.kind) {
    case Node::Kind::constant: return n.value < 0.0 || std::signbit(n.value) ? kUnary : kAtom;
    case Node::Kind::variable:
    case Node::Kind::call: return kAtom;
    case Node::Kind::negate: return kUnary;
    case Node::Kind::binary:
      switch (n.op) {
        case BinaryOp::add:
        case BinaryOp::sub: return kAdd;
        case BinaryOp::mul:
        case BinaryOp::div: return kMul;
        case BinaryOp::pow: return kPow;
      }
  }
  return kAtom;
}

std::string format_literal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void print(const Node& n, std::string& out);

void print_operand(const Node& n, bool parens, std::string& out) {
  if (parens) out += '(';
  print(n, out);
  if (parens) out += ')';
}

void print(const Node& n, std::string& out) {
  switch (n.kind) {
    case Node::Kind::constant: out += format_literal(n.value); return;
    case Node::Kind::variable: out += var_name(n.var); return;
    case Node::Kind::negate:
      out += '-';
      print_operand(*n.lhs, precedence(*n.lhs) < kUnary, out);
      return;
    case Node::Kind::call:
      out += func_name(n.func);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
    case Node::Kind::binary: {
      const int p = precedence(n);
      const int pl = precedence(*n.lhs);
      const int pr = precedence(*n.rhs);
      if (n.op == BinaryOp::pow) {
        // Right-associative: the base needs parentheses unless atomic.
        print_operand(*n.lhs, pl <= kPow, out);
        out += '^';
        print_operand(*n.rhs, pr < kUnary, out);
        return;
      }
      // Left-associative: keep the tree shape exactly so evaluation is bit-identical.
      print_operand(*n.lhs, pl < p, out);
      switch (n.op) {
        case BinaryOp::add: out += " + "; break;
        case BinaryOp::sub: out += " - "; break;
        case BinaryOp::mul: out += '*'; break;
        case BinaryOp::div: out += '/'; break;
        case BinaryOp::pow: break;
      }
      print_operand(*n.rhs, pr <= p, out);
      return;
    }
  }
}

// ----------------------------------------------------------------- parsing

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    NodePtr e = parse_sum();
    skip_space();
    if (pos_ < text_.size()) throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "' before end of input", pos_);
      throw ParseError(std::string("expected '") + c + "' but found '" + text_[pos_] + "'", pos_);
    }
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = make_raw_binary(BinaryOp::add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = make_raw_binary(BinaryOp::sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_raw_binary(BinaryOp::mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = make_raw_binary(BinaryOp::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::negate;
      n->lhs = parse_unary();
      return n;
    }
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make_raw_binary(BinaryOp::pow, base, parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_sum();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    const auto* first = text_.data() + start;
    const auto* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) throw ParseError("malformed number", start);
    return make_constant(value);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    static constexpr std::pair<std::string_view, Var> kVars[] = {
        {"t", Var::t}, {"s", Var::s}, {"y", Var::y}, {"u", Var::u}};
    for (const auto& [n, v] : kVars) {
      if (name == n) return make_variable(v);
    }
    if (name == "pi") return make_constant(std::numbers::pi);

    static constexpr std::pair<std::string_view, Func> kFuncs[] = {
        {"sqrt", Func::sqrt}, {"exp", Func::exp}, {"log", Func::log}, {"sin", Func::sin},
        {"cos", Func::cos},   {"abs", Func::abs}, {"sign", Func::sign}};
    for (const auto& [n, f] : kFuncs) {
      if (name != n) continue;
      if (!accept('(')) throw ParseError("function '" + std::string(name) + "' requires an argument list", pos_);
      std::vector<NodePtr> args;
      if (!accept(')')) {
        args.push_back(parse_sum());
        while (accept(',')) args.push_back(parse_sum());
        expect(')');
      }
      if (args.size() != 1) {
        throw ParseError("function '" + std::string(name) + "' takes 1 argument, got " +
                             std::to_string(args.size()),
                         start);
      }
      auto node = std::make_shared<Node>();
      node->kind = Node::Kind::call;
      node->func = f;
      node->lhs = std::move(args.front());
      return node;
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// --------------------------------------------------------- differentiation

ScalarExpr wrap(NodePtr n) { return ScalarExpr(std::move(n)); }

ScalarExpr diff(const ScalarExpr& e, Var var, DiffDiagnostics* diag) {
  const Node& n = e.node();
  const ScalarExpr zero = ScalarExpr::constant(0.0);
  if (!(collect_vars(n) & var_bit(var))) return zero;

  switch (n.kind) {
    case Node::Kind::constant: return zero;
    case Node::Kind::variable: return ScalarExpr::constant(n.var == var ? 1.0 : 0.0);
    case Node::Kind::negate: return -diff(wrap(n.lhs), var, diag);
    case Node::Kind::binary: {
      const ScalarExpr a = wrap(n.lhs);
      const ScalarExpr b = wrap(n.rhs);
      switch (n.op) {
        case BinaryOp::add: return diff(a, var, diag) + diff(b, var, diag);
        case BinaryOp::sub: return diff(a, var, diag) - diff(b, var, diag);
        case BinaryOp::mul: return diff(a, var, diag) * b + a * diff(b, var, diag);
        case BinaryOp::div: {
          const ScalarExpr da = diff(a, var, diag);
          const ScalarExpr db = diff(b, var, diag);
          return da / b - a * db / pow(b, ScalarExpr::constant(2.0));
        }
        case BinaryOp::pow: {
          const ScalarExpr da = diff(a, var, diag);
          if (!(collect_vars(*n.rhs) & var_bit(var))) {
            // d(a^c) = c a^(c-1) a'
            return b * pow(a, b - ScalarExpr::constant(1.0)) * da;
          }
          const ScalarExpr db = diff(b, var, diag);
          return e * (db * call(Func::log, a) + b * da / a);
        }
      }
      return zero;
    }
    case Node::Kind::call: {
      const ScalarExpr a = wrap(n.lhs);
      const ScalarExpr da = diff(a, var, diag);
      switch (n.func) {
        case Func::sqrt: return da / (ScalarExpr::constant(2.0) * e);
        case Func::exp: return e * da;
        case Func::log: return da / a;
        case Func::sin: return call(Func::cos, a) * da;
        case Func::cos: return -(call(Func::sin, a) * da);
        case Func::abs:
          if (diag) diag->non_smooth = true;
          return call(Func::sign, a) * da;
        case Func::sign: return zero;  // zero almost everywhere
      }
      return zero;
    }
  }
  return zero;
}

}  // namespace

// ------------------------------------------------------------- ScalarExpr

ScalarExpr::ScalarExpr() : node_(make_constant(0.0)) {}

ScalarExpr ScalarExpr::constant(double value) { return ScalarExpr(make_constant(value)); }
ScalarExpr ScalarExpr::variable(Var v) { return ScalarExpr(make_variable(v)); }

double ScalarExpr::evaluate(const Point& p) const { return eval_node(*node_, p); }
bool ScalarExpr::is_constant() const { return is_const(*node_); }
double ScalarExpr::constant_value() const { return node_->value; }
VarMask ScalarExpr::variables() const { return collect_vars(*node_); }

std::string ScalarExpr::to_string() const {
  std::string out;
  print(*node_, out);
  return out;
}

ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
  const Node& x = a.node();
  const Node& y = b.node();
  if (is_const(x) && is_const(y)) return ScalarExpr::constant(x.value + y.value);
  if (is_value(x, 0.0)) return b;
  if (is_value(y, 0.0)) return a;
  return wrap(make_raw_binary(BinaryOp::add, a.ptr(), b.ptr()));
}

ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) {
  const Node& x = a.node();
  const Node& y = b.node();
  if (is_const(x) && is_const(y)) return ScalarExpr::constant(x.value - y.value);
  if (is_value(y, 0.0)) return a;
  if (is_value(x, 0.0)) return -b;
  return wrap(make_raw_binary(BinaryOp::sub, a.ptr(), b.ptr()));
}

ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
  const Node& x = a.node();
  const Node& y = b.node();
  if (is_const(x) && is_const(y)) return ScalarExpr::constant(x.value * y.value);
  if (is_value(x, 0.0) || is_value(y, 0.0)) return ScalarExpr::constant(0.0);
  if (is_value(x, 1.0)) return b;
  if (is_value(y, 1.0)) return a;
  if (is_value(x, -1.0)) return -b;
  if (is_value(y, -1.0)) return -a;
  return wrap(make_raw_binary(BinaryOp::mul, a.ptr(), b.ptr()));
}

ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) {
  const Node& x = a.node();
  const Node& y = b.node();
  if (is_const(x) && is_const(y) && y.value != 0.0) return ScalarExpr::constant(x.value / y.value);
  if (is_value(x, 0.0)) return ScalarExpr::constant(0.0);
  if (is_value(y, 1.0)) return a;
  return wrap(make_raw_binary(BinaryOp::div, a.ptr(), b.ptr()));
}

ScalarExpr operator-(const ScalarExpr& a) {
  const Node& x = a.node();
  if (is_const(x)) return ScalarExpr::constant(-x.value);
  if (x.kind == Node::Kind::negate) return wrap(x.lhs);
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::negate;
  n->lhs = a.ptr();
  return wrap(n);
}

ScalarExpr pow(const ScalarExpr& base, const ScalarExpr& exponent) {
  const Node& x = base.node();
  const Node& y = exponent.node();
  if (is_const(x) && is_const(y)) {
    const double v = std::pow(x.value, y.value);
    if (std::isfinite(v)) return ScalarExpr::constant(v);
  }
  if (is_value(y, 0.0)) return ScalarExpr::constant(1.0);
  if (is_value(y, 1.0)) return base;
  return wrap(make_raw_binary(BinaryOp::pow, base.ptr(), exponent.ptr()));
}

ScalarExpr call(Func f, const ScalarExpr& arg) {
  const Node& x = arg.node();
  if (is_const(x)) {
    const double v = apply_func(f, x.value);
    if (std::isfinite(v)) return ScalarExpr::constant(v);
  }
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::call;
  n->func = f;
  n->lhs = arg.ptr();
  return wrap(n);
}

ScalarExpr parse_expression(std::string_view text) { return ScalarExpr(Parser(text).parse()); }

ScalarExpr differentiate(const ScalarExpr& e, Var var, DiffDiagnostics* diagnostics) {
  return diff(e, var, diagnostics);
}

std::string_view var_name(Var v) {
  switch (v) {
    case Var::t: return "t";
    case Var::s: return "s";
    case Var::y: return "y";
    case Var::u: return "u";
  }
  return "?";
}

std::string_view func_name(Func f) {
  switch (f) {
    case Func::sqrt: return "sqrt";
    case Func::exp: return "exp";
    case Func::log: return "log";
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::abs: return "abs";
    case Func::sign: return "sign";
  }
  return "?";
}

// ----------------------------------------------------------- CompiledExpr

CompiledExpr::CompiledExpr(const ScalarExpr& e) {
  std::size_t depth = 0;
  std::size_t max_depth = 0;
  emit(e.node(), depth, max_depth);
  constant_ = e.is_constant();
  constant_value_ = constant_ ? e.constant_value() : 0.0;
}

void CompiledExpr::emit(const Node& n, std::size_t& depth, std::size_t& max_depth) {
  auto push = [&](Instr in) {
    code_.push_back(in);
    if (++depth > max_depth) max_depth = depth;
    if (max_depth > kMaxStack) throw Error("expression nested too deeply to compile");
  };
  switch (n.kind) {
    case Node::Kind::constant: push({OpCode::push, 0, n.value}); return;
    case Node::Kind::variable: push({OpCode::load, static_cast<std::uint8_t>(n.var), 0.0}); return;
    case Node::Kind::negate:
      emit(*n.lhs, depth, max_depth);
      code_.push_back({OpCode::neg, 0, 0.0});
      return;
    case Node::Kind::call:
      emit(*n.lhs, depth, max_depth);
      code_.push_back({OpCode::call, static_cast<std::uint8_t>(n.func), 0.0});
      return;
    case Node::Kind::binary: {
      emit(*n.lhs, depth, max_depth);
      emit(*n.rhs, depth, max_depth);
      --depth;
      static constexpr OpCode kCodes[] = {OpCode::add, OpCode::sub, OpCode::mul, OpCode::div, OpCode::pow};
      code_.push_back({kCodes[static_cast<int>(n.op)], 0, 0.0});
      return;
    }
  }
}

double CompiledExpr::operator()(const Point& p) const {
  if (constant_) return constant_value_;
  double stack[kMaxStack];
  std::size_t top = 0;
  const double vars[4] = {p.t, p.s, p.y, p.u};
  for (const Instr& in : code_) {
    switch (in.code) {
      case OpCode::push: stack[top++] = in.value; break;
      case OpCode::load: stack[top++] = vars[in.index]; break;
      case OpCode::neg: stack[top - 1] = -stack[top - 1]; break;
      case OpCode::add: --top; stack[top - 1] += stack[top]; break;
      case OpCode::sub: --top; stack[top - 1] -= stack[top]; break;
      case OpCode::mul: --top; stack[top - 1] *= stack[top]; break;
      case OpCode::div: --top; stack[top - 1] /= stack[top]; break;
      case OpCode::pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
      case OpCode::call: stack[top - 1] = apply_func(static_cast<Func>(in.index), stack[top - 1]); break;
    }
  }
  return stack[0];
}

}  // namespace svoc
