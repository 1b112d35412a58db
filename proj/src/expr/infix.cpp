#include "amwp/expr/infix.hpp"

#include <cctype>
#include <charconv>

namespace amwp::expr {

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::span<const double> slots) : s_(text), slots_(slots) {}

  ExprTree parse() {
    skip_assignment();
    ExprTree t = expr();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
    return t;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  void skip_assignment() {
    skip_ws();
    if (pos_ < s_.size() && (s_[pos_] == 'x' || s_[pos_] == 'X')) {
      std::size_t p = pos_ + 1;
      while (p < s_.size() && std::isspace(static_cast<unsigned char>(s_[p]))) ++p;
      if (p < s_.size() && s_[p] == '=') pos_ = p + 1;
    }
  }

  // Returns the ASCII operator at the cursor (mapping Unicode signs), or 0.
  char peek_op(std::size_t* width = nullptr) {
    skip_ws();
    if (pos_ >= s_.size()) return 0;
    auto starts = [&](std::string_view u) { return s_.substr(pos_, u.size()) == u; };
    std::size_t w = 1;
    char c = s_[pos_];
    if (starts("−")) {
      c = '-';
      w = std::string_view("−").size();
    } else if (starts("×")) {
      c = '*';
      w = std::string_view("×").size();
    } else if (starts("÷")) {
      c = '/';
      w = std::string_view("÷").size();
    }
    if (width) *width = w;
    return std::string_view("+-*/^()").find(c) != std::string_view::npos ? c : 0;
  }

  void consume(std::size_t width) { pos_ += width; }

  ExprTree expr() {
    ExprTree lhs = term();
    for (;;) {
      std::size_t w = 0;
      const char c = peek_op(&w);
      if (c != '+' && c != '-') return lhs;
      consume(w);
      ExprTree rhs = term();
      lhs = ExprTree::node(c == '+' ? Operator::Add : Operator::Sub, std::move(lhs), std::move(rhs));
    }
  }

  ExprTree term() {
    ExprTree lhs = power();
    for (;;) {
      std::size_t w = 0;
      const char c = peek_op(&w);
      if (c != '*' && c != '/') return lhs;
      consume(w);
      ExprTree rhs = power();
      lhs = ExprTree::node(c == '*' ? Operator::Mul : Operator::Div, std::move(lhs), std::move(rhs));
    }
  }

  ExprTree power() {
    ExprTree base = primary();
    std::size_t w = 0;
    if (peek_op(&w) != '^') return base;
    consume(w);
    ExprTree exponent = power();
    return ExprTree::node(Operator::Pow, std::move(base), std::move(exponent));
  }

  ExprTree primary() {
    std::size_t w = 0;
    const char c = peek_op(&w);
    if (pos_ >= s_.size()) throw ParseError("unexpected end of equation", pos_);
    if (c == '(') {
      consume(w);
      ExprTree inner = expr();
      if (peek_op(&w) != ')') throw ParseError("expected ')'", pos_);
      consume(w);
      return inner;
    }
    if (c == '-') {
      const std::size_t at = pos_;
      consume(w);
      skip_ws();
      if (pos_ >= s_.size() || !(std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
        throw ParseError("unary minus is only supported on numeric literals", at);
      return literal(-1.0);
    }
    if (s_[pos_] == 'N') return slot_name();
    if (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.') return literal(1.0);
    throw ParseError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
  }

  ExprTree slot_name() {
    const std::size_t at = pos_++;
    std::size_t end = pos_;
    while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end]))) ++end;
    if (end == pos_) throw ParseError("expected slot index after 'N'", at);
    int idx = 0;
    std::from_chars(s_.data() + pos_, s_.data() + end, idx);
    pos_ = end;
    return ExprTree::leaf(Token::slot(idx));
  }

  ExprTree literal(double sign) {
    const std::size_t at = pos_;
    std::size_t end = pos_;
    while (end < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[end])) || s_[end] == '.')) ++end;
    double v = 0.0;
    auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + end, v);
    if (ec != std::errc() || p != s_.data() + end) throw ParseError("malformed number", at);
    pos_ = end;
    if (pos_ < s_.size() && s_[pos_] == '%') {
      v /= 100.0;
      ++pos_;
    }
    v *= sign;
    for (std::size_t i = 0; i < slots_.size(); ++i)
      if (rel_close(v, slots_[i], 1e-9)) return ExprTree::leaf(Token::slot(static_cast<int>(i)));
    return ExprTree::leaf(Token::constant(v));
  }

  std::string_view s_;
  std::span<const double> slots_;
  std::size_t pos_ = 0;
};

void render(const ExprTree& t, std::span<const double> slots, std::string& out) {
  if (t.is_leaf()) {
    double v = 0.0;
    if (t.token.kind() == Token::Kind::Constant) {
      v = t.token.value();
    } else if (static_cast<std::size_t>(t.token.slot_index()) < slots.size()) {
      v = slots[static_cast<std::size_t>(t.token.slot_index())];
    } else {
      out += t.token.text();
      return;
    }
    if (v < 0) {
      out += "(" + format_number(v) + ")";
    } else {
      out += format_number(v);
    }
    return;
  }
  const Operator op = t.token.oper();
  const int p = precedence(op);
  auto wrap = [&](const ExprTree& child, bool is_right) {
    bool paren = false;
    if (!child.is_leaf()) {
      const int cp = precedence(child.token.oper());
      paren = cp < p || (cp == p && (is_right != right_associative(op)));
    }
    if (paren) out += '(';
    render(child, slots, out);
    if (paren) out += ')';
  };
  wrap(t.left(), false);
  out += op_symbol(op);
  wrap(t.right(), true);
}

}  // namespace

ExprTree parse_infix(std::string_view text, std::span<const double> slot_values) {
  return Parser(text, slot_values).parse();
}

std::string to_infix(const ExprTree& tree, std::span<const double> slot_values) {
  std::string out;
  render(tree, slot_values, out);
  return out;
}

}  // namespace amwp::expr
