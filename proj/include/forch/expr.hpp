#pragma once

// Minimal arithmetic expression language over the variables x, y, t.
//
// Grammar:  + - * / ^, unary minus, numbers, the constants pi and e, and the
// functions sin, cos, exp, log, sqrt, pow(a, b). The language is closed under
// differentiation, so boundary data written in it has exact derivatives.

#include <memory>
#include <string>
#include <string_view>

namespace forch {

enum class Var { X, Y, T };

class Expr {
public:
  struct Node;

  /// Zero constant.
  Expr();

  /// Throws ValidationError("expression", ...) on malformed input.
  static Expr parse(std::string_view text);
  static Expr constant(double value);
  static Expr variable(Var v);

  double eval(double x, double y, double t) const;

  /// Symbolic partial derivative, lightly simplified.
  Expr diff(Var v) const;

  bool is_constant() const;
  /// Value of a constant expression; only meaningful when is_constant().
  double constant_value() const;
  bool depends_on(Var v) const;

  std::string str() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& a, const Expr& b);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr exp(const Expr& a);
  friend Expr log(const Expr& a);
  friend Expr sqrt(const Expr& a);

private:
  explicit Expr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

}  // namespace forch
