#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>

#include "kwvortex/error.hpp"
#include "kwvortex/manifold.hpp"

namespace kwv {

// Scalar expressions in the chart coordinates x, y (scaled to [0, 1)).
//
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := ('+'|'-') unary | factor
//   factor := base ('^' ['+'|'-'] integer)?
//   base   := number | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func   := sin | cos | exp | log
class Expression {
 public:
  enum class Op { number, var_x, var_y, pi, neg, add, sub, mul, div, pow, sin, cos, exp, log };

  Expression() = default;

  double operator()(double x, double y) const {
    if (!node_) throw DomainError("evaluating an empty expression");
    return eval(*node_, x, y);
  }

  std::string pretty_print() const { return node_ ? print(*node_) : std::string(); }

  // Sample onto the grid; log of a nonpositive value is an error at the node.
  ScalarField sample(const ManifoldGrid& grid) const {
    return kwv::sample(grid, [this](double x, double y) { return (*this)(x, y); });
  }

  bool empty() const noexcept { return !node_; }

 private:
  struct Node {
    Op op = Op::number;
    double value = 0.0;  // number literal
    int exponent = 0;    // pow
    std::shared_ptr<const Node> a, b;
  };
  using NodePtr = std::shared_ptr<const Node>;

  explicit Expression(NodePtr n) : node_(std::move(n)) {}

  static double eval(const Node& n, double x, double y) {
    switch (n.op) {
      case Op::number: return n.value;
      case Op::var_x: return x;
      case Op::var_y: return y;
      case Op::pi: return std::numbers::pi;
      case Op::neg: return -eval(*n.a, x, y);
      case Op::add: return eval(*n.a, x, y) + eval(*n.b, x, y);
      case Op::sub: return eval(*n.a, x, y) - eval(*n.b, x, y);
      case Op::mul: return eval(*n.a, x, y) * eval(*n.b, x, y);
      case Op::div: return eval(*n.a, x, y) / eval(*n.b, x, y);
      case Op::pow: return std::pow(eval(*n.a, x, y), n.exponent);
      case Op::sin: return std::sin(eval(*n.a, x, y));
      case Op::cos: return std::cos(eval(*n.a, x, y));
      case Op::exp: return std::exp(eval(*n.a, x, y));
      case Op::log: {
        const double v = eval(*n.a, x, y);
        if (!(v > 0.0)) {
          char buf[128];
          std::snprintf(buf, sizeof buf, "log of nonpositive value %.17g at (x, y) = (%.17g, %.17g)", v, x, y);
          throw DomainError(buf);
        }
        return std::log(v);
      }
    }
    return 0.0;
  }

  static std::string print(const Node& n) {
    switch (n.op) {
      case Op::number: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        return buf;
      }
      case Op::var_x: return "x";
      case Op::var_y: return "y";
      case Op::pi: return "pi";
      case Op::neg: return "(-" + print(*n.a) + ")";
      case Op::add: return "(" + print(*n.a) + " + " + print(*n.b) + ")";
      case Op::sub: return "(" + print(*n.a) + " - " + print(*n.b) + ")";
      case Op::mul: return "(" + print(*n.a) + " * " + print(*n.b) + ")";
      case Op::div: return "(" + print(*n.a) + " / " + print(*n.b) + ")";
      case Op::pow: return "(" + print(*n.a) + ")^" + std::to_string(n.exponent);
      case Op::sin: return "sin(" + print(*n.a) + ")";
      case Op::cos: return "cos(" + print(*n.a) + ")";
      case Op::exp: return "exp(" + print(*n.a) + ")";
      case Op::log: return "log(" + print(*n.a) + ")";
    }
    return {};
  }

  class Parser {
   public:
    explicit Parser(std::string_view text) : s_(text) {}

    NodePtr parse() {
      NodePtr e = expr();
      skip();
      if (pos_ != s_.size()) throw ParseError(std::string("unexpected '") + s_[pos_] + "'", pos_);
      return e;
    }

   private:
    std::string_view s_;
    std::size_t pos_ = 0;

    void skip() {
      while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
      skip();
      if (pos_ < s_.size() && s_[pos_] == c) {
        ++pos_;
        return true;
      }
      return false;
    }
    void expect(char c) {
      if (!accept(c)) {
        if (pos_ >= s_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
        throw ParseError(std::string("expected '") + c + "'", pos_);
      }
    }
    static NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
      auto n = std::make_shared<Node>();
      n->op = op;
      n->a = std::move(a);
      n->b = std::move(b);
      return n;
    }

    NodePtr expr() {
      NodePtr lhs = term();
      for (;;) {
        if (accept('+')) lhs = make(Op::add, lhs, term());
        else if (accept('-')) lhs = make(Op::sub, lhs, term());
        else return lhs;
      }
    }
    NodePtr term() {
      NodePtr lhs = unary();
      for (;;) {
        if (accept('*')) lhs = make(Op::mul, lhs, unary());
        else if (accept('/')) lhs = make(Op::div, lhs, unary());
        else return lhs;
      }
    }
    NodePtr unary() {
      if (accept('-')) return make(Op::neg, unary());
      if (accept('+')) return unary();
      return factor();
    }
    NodePtr factor() {
      NodePtr b = base();
      if (!accept('^')) return b;
      skip();
      const std::size_t start = pos_;
      bool negative = false;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) negative = s_[pos_++] == '-';
      const std::size_t digits = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ == digits) throw ParseError("exponent must be an integer", start);
      if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E'))
        throw ParseError("exponent must be an integer", start);
      if (pos_ - digits > 6) throw ParseError("exponent too large", start);
      const int e = std::stoi(std::string(s_.substr(digits, pos_ - digits)));
      auto n = std::make_shared<Node>();
      n->op = Op::pow;
      n->exponent = negative ? -e : e;
      n->a = std::move(b);
      return n;
    }
    NodePtr base() {
      skip();
      if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
      const char c = s_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
      if (c == '(') {
        ++pos_;
        NodePtr e = expr();
        expect(')');
        return e;
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string_view id = s_.substr(start, pos_ - start);
        if (id == "x") return make(Op::var_x);
        if (id == "y") return make(Op::var_y);
        if (id == "pi") return make(Op::pi);
        Op f;
        if (id == "sin") f = Op::sin;
        else if (id == "cos") f = Op::cos;
        else if (id == "exp") f = Op::exp;
        else if (id == "log") f = Op::log;
        else throw ParseError("unknown identifier '" + std::string(id) + "'", start);
        expect('(');
        NodePtr arg = expr();
        expect(')');
        return make(f, arg);
      }
      throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }
    NodePtr number() {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ < s_.size() && s_[pos_] == '.') {
        ++pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
      if (pos_ == start + 1 && s_[start] == '.') throw ParseError("malformed number", start);
      if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
        std::size_t p = pos_ + 1;
        if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
        const std::size_t digits = p;
        while (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) ++p;
        if (p == digits) throw ParseError("malformed number exponent", pos_);
        pos_ = p;
      }
      auto n = std::make_shared<Node>();
      n->op = Op::number;
      n->value = std::strtod(std::string(s_.substr(start, pos_ - start)).c_str(), nullptr);
      if (!std::isfinite(n->value)) throw ParseError("number out of range", start);
      return n;
    }
  };

  friend Expression parse_scalar_expression(std::string_view text);

  NodePtr node_;
};

inline Expression parse_scalar_expression(std::string_view text) {
  return Expression(Expression::Parser(text).parse());
}

}  // namespace kwv
