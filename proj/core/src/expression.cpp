#include "vvflow/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace vvflow {

struct Expression::Node {
  enum class Kind { Number, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp };
  Kind kind;
  double number = 0;
  int var = 0;  // 0:x 1:y 2:z
  std::shared_ptr<const Node> a, b;

  double eval(const Eigen::Vector3d& p) const {
    switch (kind) {
      case Kind::Number: return number;
      case Kind::Var: return p[var];
      case Kind::Add: return a->eval(p) + b->eval(p);
      case Kind::Sub: return a->eval(p) - b->eval(p);
      case Kind::Mul: return a->eval(p) * b->eval(p);
      case Kind::Div: return a->eval(p) / b->eval(p);
      case Kind::Pow: return std::pow(a->eval(p), b->eval(p));
      case Kind::Neg: return -a->eval(p);
      case Kind::Sin: return std::sin(a->eval(p));
      case Kind::Cos: return std::cos(a->eval(p));
      case Kind::Exp: return std::exp(a->eval(p));
    }
    return 0;
  }
};

double Expression::eval(const Eigen::Vector3d& p) const { return root_->eval(p); }

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression parse error at position " + std::to_string(pos_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr e = term();
    for (;;) {
      if (consume('+'))
        e = make(Node::Kind::Add, e, term());
      else if (consume('-'))
        e = make(Node::Kind::Sub, e, term());
      else
        return e;
    }
  }

  NodePtr term() {
    NodePtr e = factor();
    for (;;) {
      if (consume('*'))
        e = make(Node::Kind::Mul, e, factor());
      else if (consume('/'))
        e = make(Node::Kind::Div, e, factor());
      else
        return e;
    }
  }

  NodePtr factor() {
    NodePtr base = unary();
    if (consume('^')) return make(Node::Kind::Pow, base, factor());
    return base;
  }

  NodePtr unary() {
    if (consume('-')) return make(Node::Kind::Neg, unary());
    return primary();
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<size_t>(end - begin);
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Number;
      n->number = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t len = 0;
      while (pos_ + len < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_ + len])))
        ++len;
      const std::string word = s_.substr(pos_, len);
      pos_ += len;
      if (word == "x" || word == "y" || word == "z") {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Var;
        n->var = word[0] - 'x';
        return n;
      }
      Node::Kind k;
      if (word == "sin")
        k = Node::Kind::Sin;
      else if (word == "cos")
        k = Node::Kind::Cos;
      else if (word == "exp")
        k = Node::Kind::Exp;
      else
        fail("unknown identifier '" + word + "'");
      if (!consume('(')) fail("expected '(' after " + word);
      NodePtr arg = expr();
      if (!consume(')')) fail("missing ')'");
      return make(k, arg);
    }
    if (consume('(')) {
      NodePtr e = expr();
      if (!consume(')')) fail("missing ')'");
      return e;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& s_;
  size_t pos_ = 0;
};

}  // namespace

Expression parse_expression(const std::string& text) {
  Parser p(text);
  return Expression(p.parse());
}

}  // namespace vvflow
