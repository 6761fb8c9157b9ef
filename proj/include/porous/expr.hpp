#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace porous {

struct ExprError : std::runtime_error {
  explicit ExprError(const std::string& what) : std::runtime_error(what) {}
};

/// A compiled closed-form expression in the spatial variables x and y.
///
/// Grammar: + - * / ^ (right assoc), unary minus, parentheses, numeric
/// literals, the constant pi and the functions
/// sin cos tan exp log sqrt abs tanh atan min max pow.
class Expr {
public:
  struct Node;

  static Expr parse(const std::string& text);

  double eval(double x, double y) const;

  Expr(Expr&&) noexcept;
  Expr& operator=(Expr&&) noexcept;
  ~Expr();

private:
  explicit Expr(std::unique_ptr<Node> root);
  std::unique_ptr<Node> root_;
};

} // namespace porous
