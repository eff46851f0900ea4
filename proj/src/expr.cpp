#include "forch/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <vector>

#include "forch/error.hpp"

namespace forch {

enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Exp, Log, Sqrt };

struct Expr::Node {
  Op op;
  double value = 0.0;
  Var var = Var::X;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_const(double v) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

NodePtr make_var(Var v) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Op::Var;
  n->var = v;
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }
bool is_const(const NodePtr& n) { return n->op == Op::Const; }

double apply(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    case Op::Neg: return -a;
    case Op::Pow: return std::pow(a, b);
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Exp: return std::exp(a);
    case Op::Log: return std::log(a);
    case Op::Sqrt: return std::sqrt(a);
    default: return 0.0;
  }
}

// Smart constructor: folds constants and drops neutral elements.
NodePtr make(Op op, NodePtr a, NodePtr b = nullptr) {
  if (is_const(a) && (!b || is_const(b))) return make_const(apply(op, a->value, b ? b->value : 0.0));
  switch (op) {
    case Op::Add:
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      break;
    case Op::Sub:
      if (is_const(b, 0.0)) return a;
      if (is_const(a, 0.0)) return make(Op::Neg, b);
      break;
    case Op::Mul:
      if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      if (is_const(a, -1.0)) return make(Op::Neg, b);
      if (is_const(b, -1.0)) return make(Op::Neg, a);
      break;
    case Op::Div:
      if (is_const(a, 0.0)) return make_const(0.0);
      if (is_const(b, 1.0)) return a;
      break;
    case Op::Neg:
      if (a->op == Op::Neg) return a->lhs;
      break;
    case Op::Pow:
      if (is_const(b, 0.0)) return make_const(1.0);
      if (is_const(b, 1.0)) return a;
      break;
    default:
      break;
  }
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

double eval_node(const Expr::Node& n, double x, double y, double t) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return n.var == Var::X ? x : (n.var == Var::Y ? y : t);
    case Op::Add: return eval_node(*n.lhs, x, y, t) + eval_node(*n.rhs, x, y, t);
    case Op::Sub: return eval_node(*n.lhs, x, y, t) - eval_node(*n.rhs, x, y, t);
    case Op::Mul: return eval_node(*n.lhs, x, y, t) * eval_node(*n.rhs, x, y, t);
    case Op::Div: return eval_node(*n.lhs, x, y, t) / eval_node(*n.rhs, x, y, t);
    case Op::Pow: {
      const double e = eval_node(*n.rhs, x, y, t);
      const double b = eval_node(*n.lhs, x, y, t);
      if (e == 2.0) return b * b;
      return std::pow(b, e);
    }
    default: return apply(n.op, eval_node(*n.lhs, x, y, t), 0.0);
  }
}

NodePtr diff_node(const NodePtr& n, Var v) {
  const auto zero = make_const(0.0);
  switch (n->op) {
    case Op::Const: return zero;
    case Op::Var: return make_const(n->var == v ? 1.0 : 0.0);
    case Op::Add: return make(Op::Add, diff_node(n->lhs, v), diff_node(n->rhs, v));
    case Op::Sub: return make(Op::Sub, diff_node(n->lhs, v), diff_node(n->rhs, v));
    case Op::Neg: return make(Op::Neg, diff_node(n->lhs, v));
    case Op::Mul:
      return make(Op::Add, make(Op::Mul, diff_node(n->lhs, v), n->rhs),
                  make(Op::Mul, n->lhs, diff_node(n->rhs, v)));
    case Op::Div: {
      // (u'w - uw') / w^2
      auto num = make(Op::Sub, make(Op::Mul, diff_node(n->lhs, v), n->rhs),
                      make(Op::Mul, n->lhs, diff_node(n->rhs, v)));
      return make(Op::Div, num, make(Op::Pow, n->rhs, make_const(2.0)));
    }
    case Op::Pow: {
      const auto& u = n->lhs;
      const auto& w = n->rhs;
      auto du = diff_node(u, v);
      auto dw = diff_node(w, v);
      if (is_const(dw, 0.0)) {
        // w u^(w-1) u'
        return make(Op::Mul, make(Op::Mul, w, make(Op::Pow, u, make(Op::Sub, w, make_const(1.0)))), du);
      }
      // u^w (w' log u + w u'/u)
      auto inner = make(Op::Add, make(Op::Mul, dw, make(Op::Log, u)),
                        make(Op::Div, make(Op::Mul, w, du), u));
      return make(Op::Mul, n, inner);
    }
    case Op::Sin: return make(Op::Mul, make(Op::Cos, n->lhs), diff_node(n->lhs, v));
    case Op::Cos: return make(Op::Neg, make(Op::Mul, make(Op::Sin, n->lhs), diff_node(n->lhs, v)));
    case Op::Exp: return make(Op::Mul, n, diff_node(n->lhs, v));
    case Op::Log: return make(Op::Div, diff_node(n->lhs, v), n->lhs);
    case Op::Sqrt:
      return make(Op::Div, diff_node(n->lhs, v), make(Op::Mul, make_const(2.0), n));
  }
  return zero;
}

bool depends(const Expr::Node& n, Var v) {
  if (n.op == Op::Var) return n.var == v;
  if (n.op == Op::Const) return false;
  return (n.lhs && depends(*n.lhs, v)) || (n.rhs && depends(*n.rhs, v));
}

void print(const Expr::Node& n, std::ostringstream& os) {
  auto fn = [&](const char* name) {
    os << name << '(';
    print(*n.lhs, os);
    os << ')';
  };
  auto bin = [&](const char* sym) {
    os << '(';
    print(*n.lhs, os);
    os << sym;
    print(*n.rhs, os);
    os << ')';
  };
  switch (n.op) {
    case Op::Const: os << n.value; break;
    case Op::Var: os << (n.var == Var::X ? 'x' : (n.var == Var::Y ? 'y' : 't')); break;
    case Op::Add: bin(" + "); break;
    case Op::Sub: bin(" - "); break;
    case Op::Mul: bin("*"); break;
    case Op::Div: bin("/"); break;
    case Op::Pow: bin("^"); break;
    case Op::Neg:
      os << "(-";
      print(*n.lhs, os);
      os << ')';
      break;
    case Op::Sin: fn("sin"); break;
    case Op::Cos: fn("cos"); break;
    case Op::Exp: fn("exp"); break;
    case Op::Log: fn("log"); break;
    case Op::Sqrt: fn("sqrt"); break;
  }
}

class Parser {
public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr parse() {
    auto n = parse_sum();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError("expression", msg + " at position " + std::to_string(pos_) + " in \"" +
                                            std::string(s_) + "\"");
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr parse_sum() {
    auto lhs = parse_product();
    for (;;) {
      if (accept('+')) lhs = make(Op::Add, lhs, parse_product());
      else if (accept('-')) lhs = make(Op::Sub, lhs, parse_product());
      else return lhs;
    }
  }

  NodePtr parse_product() {
    auto lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = make(Op::Mul, lhs, parse_unary());
      else if (accept('/')) lhs = make(Op::Div, lhs, parse_unary());
      else return lhs;
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make(Op::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    auto base = parse_primary();
    if (accept('^')) return make(Op::Pow, base, parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto n = parse_sum();
      expect(')');
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(s_.substr(pos_));
      char* end = nullptr;
      const double v = std::strtod(rest.c_str(), &end);
      if (end == rest.c_str()) fail("bad number");
      pos_ += static_cast<std::size_t>(end - rest.c_str());
      return make_const(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      const std::string id(s_.substr(start, pos_ - start));
      if (id == "x") return make_var(Var::X);
      if (id == "y") return make_var(Var::Y);
      if (id == "t") return make_var(Var::T);
      if (id == "pi") return make_const(std::numbers::pi);
      if (id == "e") return make_const(std::numbers::e);
      expect('(');
      auto arg = parse_sum();
      if (id == "pow") {
        expect(',');
        auto ex = parse_sum();
        expect(')');
        return make(Op::Pow, arg, ex);
      }
      expect(')');
      if (id == "sin") return make(Op::Sin, arg);
      if (id == "cos") return make(Op::Cos, arg);
      if (id == "exp") return make(Op::Exp, arg);
      if (id == "log") return make(Op::Log, arg);
      if (id == "sqrt") return make(Op::Sqrt, arg);
      pos_ = start;
      fail("unknown function '" + id + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr::Expr() : node_(make_const(0.0)) {}
Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::parse(std::string_view text) { return Expr(Parser(text).parse()); }
Expr Expr::constant(double value) { return Expr(make_const(value)); }
Expr Expr::variable(Var v) { return Expr(make_var(v)); }

double Expr::eval(double x, double y, double t) const { return eval_node(*node_, x, y, t); }
Expr Expr::diff(Var v) const { return Expr(diff_node(node_, v)); }
bool Expr::is_constant() const { return node_->op == Op::Const; }
double Expr::constant_value() const { return node_->value; }
bool Expr::depends_on(Var v) const { return depends(*node_, v); }

std::string Expr::str() const {
  std::ostringstream os;
  os.precision(17);
  print(*node_, os);
  return os.str();
}

Expr operator+(const Expr& a, const Expr& b) { return Expr(make(Op::Add, a.node_, b.node_)); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(make(Op::Sub, a.node_, b.node_)); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(make(Op::Mul, a.node_, b.node_)); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(make(Op::Div, a.node_, b.node_)); }
Expr operator-(const Expr& a) { return Expr(make(Op::Neg, a.node_)); }
Expr pow(const Expr& a, const Expr& b) { return Expr(make(Op::Pow, a.node_, b.node_)); }
Expr sin(const Expr& a) { return Expr(make(Op::Sin, a.node_)); }
Expr cos(const Expr& a) { return Expr(make(Op::Cos, a.node_)); }
Expr exp(const Expr& a) { return Expr(make(Op::Exp, a.node_)); }
Expr log(const Expr& a) { return Expr(make(Op::Log, a.node_)); }
Expr sqrt(const Expr& a) { return Expr(make(Op::Sqrt, a.node_)); }

}  // namespace forch
