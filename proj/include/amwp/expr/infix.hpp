#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "amwp/expr/tree.hpp"

namespace amwp::expr {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " at position " + std::to_string(pos)), position_(pos) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Parses an infix equation into a tree.
///
/// Grammar: numbers (optionally suffixed by %, meaning value/100), slot
/// names N<i>, + - * / ^ and parentheses, with an optional leading "x=".
/// ^ binds tightest and is right-associative; * / and + - are
/// left-associative. A numeric literal becomes the earliest slot holding an
/// equal value; otherwise it becomes a Constant. The Unicode signs − × ÷
/// are accepted as - * /.
ExprTree parse_infix(std::string_view text, std::span<const double> slot_values);

/// Infix rendering with the minimum parentheses that preserve tree shape.
/// Slots render as their value when slot_values covers them, else as N<i>;
/// constants render as their value.
std::string to_infix(const ExprTree& tree, std::span<const double> slot_values = {});

}  // namespace amwp::expr
