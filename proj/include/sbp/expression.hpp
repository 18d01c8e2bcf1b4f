#pragma once

#include <memory>
#include <string>

namespace sbp {

/// Arithmetic expression in one variable `i`.
///
/// Grammar: + - * / ^, numeric literals, `i`, parentheses and unary minus.
/// `^` is right-associative and binds tighter than unary minus, so -i^2 = -(i^2).
class Expression {
 public:
  /// Throws SpecError with the offending column on malformed input.
  static Expression parse(const std::string& text);

  double operator()(double i) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace sbp
