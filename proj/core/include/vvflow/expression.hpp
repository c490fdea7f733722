// Recursive-descent parser for the forcing mini-grammar:
//   expr   := term  (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := unary ('^' factor)?          (right-associative)
//   unary  := '-' unary | primary
//   primary:= number | 'x' | 'y' | 'z' | ('sin'|'cos'|'exp') '(' expr ')'
//           | '(' expr ')'
#pragma once

#include <memory>
#include <string>

#include <Eigen/Dense>

#include "vvflow/errors.hpp"

namespace vvflow {

class Expression {
 public:
  double eval(const Eigen::Vector3d& p) const;

  struct Node;
  explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

 private:
  std::shared_ptr<const Node> root_;
};

// Throws ConfigError with the offending position on malformed input.
Expression parse_expression(const std::string& text);

}  // namespace vvflow
