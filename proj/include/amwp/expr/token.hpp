#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace amwp::expr {

enum class Operator : std::uint8_t { Add, Sub, Mul, Div, Pow };

inline constexpr std::array<Operator, 5> kOperators = {Operator::Add, Operator::Sub, Operator::Mul, Operator::Div,
                                                       Operator::Pow};

char op_symbol(Operator op);
int precedence(Operator op);
bool right_associative(Operator op);

/// One unit of an equation: an operator, a problem number slot N<i>, or a constant.
///
/// Constants are identified by their symbol (the canonical short text of
/// the value, e.g. "3.14159" for pi); two constants with the same symbol are
/// the same token.
class Token {
 public:
  enum class Kind : std::uint8_t { Operator, Slot, Constant };

  static Token op(Operator o);
  static Token slot(int index);
  static Token constant(double value);
  static Token constant(std::string symbol, double value);

  Kind kind() const { return kind_; }
  bool is_operator() const { return kind_ == Kind::Operator; }
  bool is_operand() const { return kind_ != Kind::Operator; }
  Operator oper() const;
  int slot_index() const;
  /// Numeric value of a constant.
  double value() const;
  const std::string& symbol() const { return symbol_; }

  /// Canonical text: "+ - * / ^", "N<i>", "C:<symbol>".
  std::string text() const;

  friend bool operator==(const Token& a, const Token& b);

 private:
  Token() = default;

  Kind kind_ = Kind::Operator;
  Operator op_ = Operator::Add;
  int slot_ = 0;
  double value_ = 0.0;
  std::string symbol_;
};

/// Solution as its pre-order token sequence.
using PrefixEquation = std::vector<Token>;

/// Six-significant-digit text used as a constant's symbol.
std::string constant_symbol(double value);
/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

std::string to_text(std::span<const Token> eq);

class TokenParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses canonical text. Constants whose symbol matches an entry of
/// known_constants take that entry's value.
PrefixEquation parse_prefix_text(std::string_view text, std::span<const Token> known_constants = {});

}  // namespace amwp::expr
