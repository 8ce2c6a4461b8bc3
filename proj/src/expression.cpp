#include "hvi/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

namespace hvi {

struct Expression::Node {
  enum class Op { Number, X, Y, Add, Sub, Mul, Div, Pow, Neg, Exp } op = Op::Number;
  double value = 0.0;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(double x, double y) const {
    switch (op) {
      case Op::Number: return value;
      case Op::X: return x;
      case Op::Y: return y;
      case Op::Add: return lhs->eval(x, y) + rhs->eval(x, y);
      case Op::Sub: return lhs->eval(x, y) - rhs->eval(x, y);
      case Op::Mul: return lhs->eval(x, y) * rhs->eval(x, y);
      case Op::Div: return lhs->eval(x, y) / rhs->eval(x, y);
      case Op::Pow: return std::pow(lhs->eval(x, y), rhs->eval(x, y));
      case Op::Neg: return -lhs->eval(x, y);
      case Op::Exp: return std::exp(lhs->eval(x, y));
    }
    return 0.0;
  }

  bool constant() const {
    if (op == Op::X || op == Op::Y) return false;
    return (!lhs || lhs->constant()) && (!rhs || rhs->constant());
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

// expr   := term (('+'|'-') term)*
// term   := unary (('*'|'/') unary)*
// unary  := '-' unary | '+' unary | power
// power  := atom ('^' unary)?
// atom   := number | x | y | exp '(' expr ')' | '(' expr ')'
class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  using Op = Expression::Node::Op;

  [[noreturn]] void fail(const std::string& msg) const { throw ExpressionError(msg, pos_); }

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

  static NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    n->value = v;
    return n;
  }

  NodePtr expr() {
    NodePtr left = term();
    for (;;) {
      if (accept('+')) {
        left = make(Op::Add, left, term());
      } else if (accept('-')) {
        left = make(Op::Sub, left, term());
      } else {
        return left;
      }
    }
  }

  NodePtr term() {
    NodePtr left = unary();
    for (;;) {
      if (accept('*')) {
        left = make(Op::Mul, left, unary());
      } else if (accept('/')) {
        left = make(Op::Div, left, unary());
      } else {
        return left;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make(Op::Pow, base, unary());
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (accept('(')) {
      NodePtr inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      const char* first = s_.data() + pos_;
      auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
      if (ec != std::errc()) fail("malformed number");
      pos_ += static_cast<std::size_t>(ptr - first);
      return make(Op::Number, nullptr, nullptr, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string_view name = s_.substr(start, pos_ - start);
      if (name == "x") return make(Op::X);
      if (name == "y") return make(Op::Y);
      if (name == "exp") {
        if (!accept('(')) fail("expected '(' after exp");
        NodePtr arg = expr();
        if (!accept(')')) fail("expected ')'");
        return make(Op::Exp, arg);
      }
      pos_ = start;
      fail("unknown identifier '" + std::string(name) + "' (allowed: x, y, exp)");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.root_ = Parser(text).parse();
  e.text_ = std::string(text);
  return e;
}

double Expression::operator()(double x, double y) const { return root_ ? root_->eval(x, y) : 0.0; }

bool Expression::is_constant() const { return !root_ || root_->constant(); }

}  // namespace hvi
