#include "porous/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <vector>

namespace porous {

struct Expr::Node {
  enum class Kind { Number, VarX, VarY, Unary, Binary, Call } kind;
  double number = 0.0;
  char op = 0;                     // for Unary/Binary
  std::string func;                // for Call
  std::vector<std::unique_ptr<Node>> args;

  double eval(double x, double y) const {
    switch (kind) {
      case Kind::Number: return number;
      case Kind::VarX: return x;
      case Kind::VarY: return y;
      case Kind::Unary: {
        double v = args[0]->eval(x, y);
        return op == '-' ? -v : v;
      }
      case Kind::Binary: {
        double a = args[0]->eval(x, y);
        double b = args[1]->eval(x, y);
        switch (op) {
          case '+': return a + b;
          case '-': return a - b;
          case '*': return a * b;
          case '/': return a / b;
          case '^': return std::pow(a, b);
        }
        return 0.0;
      }
      case Kind::Call: {
        auto a = [&](size_t i) { return args[i]->eval(x, y); };
        if (func == "sin") return std::sin(a(0));
        if (func == "cos") return std::cos(a(0));
        if (func == "tan") return std::tan(a(0));
        if (func == "exp") return std::exp(a(0));
        if (func == "log") return std::log(a(0));
        if (func == "sqrt") return std::sqrt(a(0));
        if (func == "abs") return std::fabs(a(0));
        if (func == "tanh") return std::tanh(a(0));
        if (func == "atan") return std::atan(a(0));
        if (func == "min") return std::min(a(0), a(1));
        if (func == "max") return std::max(a(0), a(1));
        if (func == "pow") return std::pow(a(0), a(1));
        return 0.0;
      }
    }
    return 0.0;
  }
};

namespace {

using Node = Expr::Node;
using NodePtr = std::unique_ptr<Node>;

struct Parser {
  const std::string& text;
  size_t pos = 0;

  explicit Parser(const std::string& t) : text(t) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ExprError("expression error at position " + std::to_string(pos) + ": " + msg +
                    " in '" + text + "'");
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  NodePtr make(Node::Kind k) {
    auto n = std::make_unique<Node>();
    n->kind = k;
    return n;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    while (true) {
      char c = peek();
      if (c != '+' && c != '-') break;
      ++pos;
      NodePtr rhs = parse_term();
      auto n = make(Node::Kind::Binary);
      n->op = c;
      n->args.push_back(std::move(lhs));
      n->args.push_back(std::move(rhs));
      lhs = std::move(n);
    }
    return lhs;
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    while (true) {
      char c = peek();
      if (c != '*' && c != '/') break;
      ++pos;
      NodePtr rhs = parse_unary();
      auto n = make(Node::Kind::Binary);
      n->op = c;
      n->args.push_back(std::move(lhs));
      n->args.push_back(std::move(rhs));
      lhs = std::move(n);
    }
    return lhs;
  }

  NodePtr parse_unary() {
    char c = peek();
    if (c == '-' || c == '+') {
      ++pos;
      auto n = make(Node::Kind::Unary);
      n->op = c;
      n->args.push_back(parse_unary());
      return n;
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (peek() == '^') {
      ++pos;
      NodePtr exp = parse_unary(); // right associative, allows -x in exponent
      auto n = make(Node::Kind::Binary);
      n->op = '^';
      n->args.push_back(std::move(base));
      n->args.push_back(std::move(exp));
      return n;
    }
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of expression");
    char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t end = 0;
      double v = 0.0;
      try {
        v = std::stod(text.substr(pos), &end);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos += end;
      auto n = make(Node::Kind::Number);
      n->number = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos;
      while (pos < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
        ++pos;
      std::string name = text.substr(start, pos - start);
      if (eat('(')) {
        static const std::vector<std::pair<std::string, int>> funcs = {
            {"sin", 1}, {"cos", 1}, {"tan", 1},  {"exp", 1}, {"log", 1},  {"sqrt", 1},
            {"abs", 1}, {"tanh", 1}, {"atan", 1}, {"min", 2}, {"max", 2}, {"pow", 2}};
        int arity = -1;
        for (const auto& [fn, ar] : funcs)
          if (fn == name) arity = ar;
        if (arity < 0) fail("unknown function '" + name + "'");
        auto n = make(Node::Kind::Call);
        n->func = name;
        n->args.push_back(parse_expr());
        for (int i = 1; i < arity; ++i) {
          if (!eat(',')) fail("function '" + name + "' expects " + std::to_string(arity) +
                              " arguments");
          n->args.push_back(parse_expr());
        }
        if (!eat(')')) fail("expected ')'");
        return n;
      }
      if (name == "x") return make(Node::Kind::VarX);
      if (name == "y") return make(Node::Kind::VarY);
      if (name == "pi") {
        auto n = make(Node::Kind::Number);
        n->number = M_PI;
        return n;
      }
      fail("unknown identifier '" + name + "'");
    }
    if (c == '(') {
      ++pos;
      NodePtr inner = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

} // namespace

Expr::Expr(std::unique_ptr<Node> root) : root_(std::move(root)) {}
Expr::Expr(Expr&&) noexcept = default;
Expr& Expr::operator=(Expr&&) noexcept = default;
Expr::~Expr() = default;

Expr Expr::parse(const std::string& text) {
  Parser p(text);
  NodePtr root = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing characters");
  return Expr(std::move(root));
}

double Expr::eval(double x, double y) const { return root_->eval(x, y); }

} // namespace porous
