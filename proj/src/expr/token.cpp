#include "amwp/expr/token.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace amwp::expr {

char op_symbol(Operator op) {
  switch (op) {
    case Operator::Add: return '+';
    case Operator::Sub: return '-';
    case Operator::Mul: return '*';
    case Operator::Div: return '/';
    case Operator::Pow: return '^';
  }
  return '?';
}

int precedence(Operator op) {
  switch (op) {
    case Operator::Add:
    case Operator::Sub: return 1;
    case Operator::Mul:
    case Operator::Div: return 2;
    case Operator::Pow: return 3;
  }
  return 0;
}

bool right_associative(Operator op) { return op == Operator::Pow; }

Token Token::op(Operator o) {
  Token t;
  t.kind_ = Kind::Operator;
  t.op_ = o;
  return t;
}

Token Token::slot(int index) {
  if (index < 0) throw std::invalid_argument("negative slot index");
  Token t;
  t.kind_ = Kind::Slot;
  t.slot_ = index;
  return t;
}

Token Token::constant(double value) { return constant(constant_symbol(value), value); }

Token Token::constant(std::string symbol, double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite constant");
  Token t;
  t.kind_ = Kind::Constant;
  t.value_ = value;
  t.symbol_ = std::move(symbol);
  return t;
}

Operator Token::oper() const {
  if (kind_ != Kind::Operator) throw std::logic_error("oper() on operand token " + text());
  return op_;
}

int Token::slot_index() const {
  if (kind_ != Kind::Slot) throw std::logic_error("slot_index() on non-slot token " + text());
  return slot_;
}

double Token::value() const {
  if (kind_ != Kind::Constant) throw std::logic_error("value() on non-constant token " + text());
  return value_;
}

std::string Token::text() const {
  switch (kind_) {
    case Kind::Operator: return std::string(1, op_symbol(op_));
    case Kind::Slot: return "N" + std::to_string(slot_);
    case Kind::Constant: return "C:" + symbol_;
  }
  return "?";
}

bool operator==(const Token& a, const Token& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case Token::Kind::Operator: return a.op_ == b.op_;
    case Token::Kind::Slot: return a.slot_ == b.slot_;
    case Token::Kind::Constant: return a.symbol_ == b.symbol_;
  }
  return false;
}

std::string constant_symbol(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string format_number(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::string to_text(std::span<const Token> eq) {
  std::string s;
  for (const Token& t : eq) {
    if (!s.empty()) s += ' ';
    s += t.text();
  }
  return s;
}

PrefixEquation parse_prefix_text(std::string_view text, std::span<const Token> known_constants) {
  PrefixEquation out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) {
    if (w == "−") w = "-";
    if (w.size() == 1 && std::string_view("+-*/^").find(w[0]) != std::string_view::npos) {
      for (Operator o : kOperators)
        if (op_symbol(o) == w[0]) out.push_back(Token::op(o));
    } else if (w.size() > 1 && w[0] == 'N') {
      int idx = 0;
      auto [p, ec] = std::from_chars(w.data() + 1, w.data() + w.size(), idx);
      if (ec != std::errc() || p != w.data() + w.size() || idx < 0) throw TokenParseError("bad slot token '" + w + "'");
      out.push_back(Token::slot(idx));
    } else if (w.rfind("C:", 0) == 0 && w.size() > 2) {
      const std::string sym = w.substr(2);
      bool found = false;
      for (const Token& k : known_constants)
        if (k.kind() == Token::Kind::Constant && k.symbol() == sym) {
          out.push_back(k);
          found = true;
          break;
        }
      if (!found) {
        double v = 0.0;
        auto [p, ec] = std::from_chars(sym.data(), sym.data() + sym.size(), v);
        if (ec != std::errc() || p != sym.data() + sym.size()) throw TokenParseError("bad constant token '" + w + "'");
        out.push_back(Token::constant(sym, v));
      }
    } else {
      throw TokenParseError("unknown token '" + w + "'");
    }
  }
  return out;
}

}  // namespace amwp::expr
