#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hvi {

class ExpressionError : public std::invalid_argument {
 public:
  ExpressionError(const std::string& msg, std::size_t column)
      : std::invalid_argument(msg + " (column " + std::to_string(column + 1) + ")"), column(column) {}
  std::size_t column;
};

/// Scalar expression in x and y: numbers, + - * / ^, parentheses, unary
/// minus and exp(). `^` is right associative.
class Expression {
 public:
  static Expression parse(std::string_view text);

  double operator()(double x, double y) const;
  const std::string& text() const { return text_; }
  /// True when the expression does not depend on x or y.
  bool is_constant() const;

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace hvi
