#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amwp/expr/token.hpp"

namespace amwp::expr {

/// The top-k operators of a solution tree; ops[0] is the root operator.
struct OperatorSignature {
  std::vector<Operator> ops;

  std::size_t level() const { return ops.size(); }
  std::string text() const;

  friend bool operator==(const OperatorSignature&, const OperatorSignature&) = default;
  friend auto operator<=>(const OperatorSignature&, const OperatorSignature&) = default;
};

/// First k operator tokens of the pre-order sequence, or nullopt when the
/// equation has fewer than k operators.
///
/// With strict_left_child the i-th operator must sit at pre-order position
/// i, i.e. each signature operator is the left child of the previous one.
std::optional<OperatorSignature> signature(std::span<const Token> eq, std::size_t k, bool strict_left_child = false);

}  // namespace amwp::expr
