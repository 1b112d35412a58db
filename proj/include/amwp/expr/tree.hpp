#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "amwp/expr/token.hpp"

namespace amwp::expr {

/// Binary expression tree. Operator nodes have exactly two children;
/// slots and constants are leaves.
struct ExprTree {
  Token token = Token::slot(0);
  std::vector<ExprTree> children;

  static ExprTree leaf(Token t);
  static ExprTree node(Operator op, ExprTree left, ExprTree right);

  bool is_leaf() const { return children.empty(); }
  const ExprTree& left() const { return children.at(0); }
  const ExprTree& right() const { return children.at(1); }

  friend bool operator==(const ExprTree& a, const ExprTree& b) = default;
};

/// Arity counter check: starts at 1, operator +1, operand -1; must stay
/// positive before the last token and reach 0 exactly at the end.
bool validate_prefix(std::span<const Token> tokens);

class InvalidPrefix : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

ExprTree prefix_to_tree(std::span<const Token> eq);
PrefixEquation tree_to_prefix(const ExprTree& tree);

std::size_t count_operators(std::span<const Token> eq);
std::size_t depth(const ExprTree& tree);

class EvalError : public std::runtime_error {
 public:
  enum class Kind { DivisionByZero, UnboundSlot, NonFinite };
  EvalError(Kind k, const std::string& what) : std::runtime_error(what), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Divisors with |v| below this are treated as zero.
inline constexpr double kDivisionEpsilon = 1e-12;

double evaluate(const ExprTree& tree, std::span<const double> slot_values);
double evaluate(std::span<const Token> eq, std::span<const double> slot_values);

/// |a - b| <= rel * max(|a|, |b|), with exact equality always accepted.
bool rel_close(double a, double b, double rel);

}  // namespace amwp::expr
