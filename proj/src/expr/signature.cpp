#include "amwp/expr/signature.hpp"

namespace amwp::expr {

std::string OperatorSignature::text() const {
  std::string s;
  for (Operator o : ops) {
    if (!s.empty()) s += ' ';
    s += op_symbol(o);
  }
  return s;
}

std::optional<OperatorSignature> signature(std::span<const Token> eq, std::size_t k, bool strict_left_child) {
  if (k == 0) return std::nullopt;
  OperatorSignature sig;
  for (std::size_t i = 0; i < eq.size() && sig.ops.size() < k; ++i) {
    if (eq[i].is_operator()) {
      sig.ops.push_back(eq[i].oper());
    } else if (strict_left_child) {
      break;
    }
  }
  if (sig.ops.size() < k) return std::nullopt;
  return sig;
}

}  // namespace amwp::expr
