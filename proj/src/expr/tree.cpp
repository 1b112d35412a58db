#include "amwp/expr/tree.hpp"

#include <algorithm>
#include <cmath>

namespace amwp::expr {

ExprTree ExprTree::leaf(Token t) {
  if (t.is_operator()) throw InvalidPrefix("operator token cannot be a leaf");
  ExprTree e;
  e.token = std::move(t);
  return e;
}

ExprTree ExprTree::node(Operator op, ExprTree left, ExprTree right) {
  ExprTree e;
  e.token = Token::op(op);
  e.children.reserve(2);
  e.children.push_back(std::move(left));
  e.children.push_back(std::move(right));
  return e;
}

bool validate_prefix(std::span<const Token> tokens) {
  if (tokens.empty()) return false;
  long open = 1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (open <= 0) return false;
    open += tokens[i].is_operator() ? 1 : -1;
  }
  return open == 0;
}

namespace {

ExprTree build(std::span<const Token> eq, std::size_t& pos) {
  const Token& t = eq[pos++];
  if (!t.is_operator()) return ExprTree::leaf(t);
  ExprTree left = build(eq, pos);
  ExprTree right = build(eq, pos);
  return ExprTree::node(t.oper(), std::move(left), std::move(right));
}

void flatten(const ExprTree& t, PrefixEquation& out) {
  out.push_back(t.token);
  for (const ExprTree& c : t.children) flatten(c, out);
}

double apply(Operator op, double a, double b) {
  switch (op) {
    case Operator::Add: return a + b;
    case Operator::Sub: return a - b;
    case Operator::Mul: return a * b;
    case Operator::Div:
      if (std::abs(b) < kDivisionEpsilon) throw EvalError(EvalError::Kind::DivisionByZero, "division by zero");
      return a / b;
    case Operator::Pow: return std::pow(a, b);
  }
  return 0.0;
}

double operand_value(const Token& t, std::span<const double> slots) {
  if (t.kind() == Token::Kind::Constant) return t.value();
  const int i = t.slot_index();
  if (static_cast<std::size_t>(i) >= slots.size())
    throw EvalError(EvalError::Kind::UnboundSlot, "slot N" + std::to_string(i) + " is unbound");
  return slots[static_cast<std::size_t>(i)];
}

double eval_node(const ExprTree& t, std::span<const double> slots) {
  if (t.is_leaf()) return operand_value(t.token, slots);
  const double v = apply(t.token.oper(), eval_node(t.left(), slots), eval_node(t.right(), slots));
  if (!std::isfinite(v)) throw EvalError(EvalError::Kind::NonFinite, "non-finite intermediate result");
  return v;
}

}  // namespace

ExprTree prefix_to_tree(std::span<const Token> eq) {
  if (!validate_prefix(eq)) throw InvalidPrefix("invalid prefix equation: " + to_text(eq));
  std::size_t pos = 0;
  return build(eq, pos);
}

PrefixEquation tree_to_prefix(const ExprTree& tree) {
  PrefixEquation out;
  flatten(tree, out);
  return out;
}

std::size_t count_operators(std::span<const Token> eq) {
  return static_cast<std::size_t>(std::count_if(eq.begin(), eq.end(), [](const Token& t) { return t.is_operator(); }));
}

std::size_t depth(const ExprTree& tree) {
  std::size_t d = 0;
  for (const ExprTree& c : tree.children) d = std::max(d, depth(c));
  return d + 1;
}

double evaluate(const ExprTree& tree, std::span<const double> slot_values) {
  const double v = eval_node(tree, slot_values);
  if (!std::isfinite(v)) throw EvalError(EvalError::Kind::NonFinite, "non-finite result");
  return v;
}

// Stack evaluation straight from the prefix form, right to left.
double evaluate(std::span<const Token> eq, std::span<const double> slot_values) {
  if (!validate_prefix(eq)) throw InvalidPrefix("invalid prefix equation: " + to_text(eq));
  std::vector<double> stack;
  stack.reserve(eq.size());
  for (std::size_t i = eq.size(); i-- > 0;) {
    const Token& t = eq[i];
    if (t.is_operand()) {
      stack.push_back(operand_value(t, slot_values));
      continue;
    }
    const double a = stack.back();
    stack.pop_back();
    const double b = stack.back();
    stack.pop_back();
    const double v = apply(t.oper(), a, b);
    if (!std::isfinite(v)) throw EvalError(EvalError::Kind::NonFinite, "non-finite intermediate result");
    stack.push_back(v);
  }
  return stack.back();
}

bool rel_close(double a, double b, double rel) {
  if (a == b) return true;
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace amwp::expr
