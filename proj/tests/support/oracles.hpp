#pragma once

// Test-only reference implementations. None of these call into the code
// paths they are used to check.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "amwp/expr/tree.hpp"

namespace oracle {

/// Evaluates an ASCII infix string directly, character by character.
/// Slots are written as numbers in the string; N<i> reads slots[i].
class InfixEvaluator {
 public:
  InfixEvaluator(const std::string& s, const std::vector<double>& slots) : s_(s), slots_(slots) {}

  double run() {
    const double v = note(sum());
    ws();
    if (i_ != s_.size()) throw std::runtime_error("oracle: trailing input in " + s_);
    return v;
  }

 private:
  void ws() {
    while (i_ < s_.size() && s_[i_] == ' ') ++i_;
  }
  bool eat(char c) {
    ws();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }
  double sum() {
    double v = product();
    for (;;) {
      if (eat('+')) v = note(v + product());
      else if (eat('-')) v = note(v - product());
      else return v;
    }
  }
  double product() {
    double v = power();
    for (;;) {
      if (eat('*')) {
        v = note(v * power());
      } else if (eat('/')) {
        const double d = power();
        if (std::abs(d) < 1e-12) throw std::domain_error("oracle: division by zero");
        v = note(v / d);
      } else {
        return v;
      }
    }
  }
  double power() {
    const double b = atom();
    if (eat('^')) return note(std::pow(b, power()));
    return b;
  }
  double atom() {
    if (eat('(')) {
      const double v = sum();
      if (!eat(')')) throw std::runtime_error("oracle: missing )");
      return v;
    }
    ws();
    double sign = 1.0;
    if (i_ < s_.size() && s_[i_] == '-') {
      sign = -1.0;
      ++i_;
    }
    if (i_ < s_.size() && s_[i_] == 'N') {
      ++i_;
      std::size_t k = 0;
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) k = k * 10 + (s_[i_++] - '0');
      return sign * slots_.at(k);
    }
    const char* begin = s_.c_str() + i_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw std::runtime_error("oracle: expected number in " + s_);
    i_ += static_cast<std::size_t>(end - begin);
    return sign * v;
  }

  double note(double v) {
    if (!std::isfinite(v)) saw_nonfinite_ = true;
    return v;
  }

  std::string s_;
  std::vector<double> slots_;
  std::size_t i_ = 0;
  bool saw_nonfinite_ = false;

 public:
  /// True when any intermediate value overflowed or became NaN.
  bool saw_nonfinite() const { return saw_nonfinite_; }
};

/// Returns false when evaluation divides by zero or passes through a
/// non-finite intermediate.
inline bool eval_infix(const std::string& s, const std::vector<double>& slots, double& out) {
  InfixEvaluator ev(s, slots);
  try {
    out = ev.run();
  } catch (const std::domain_error&) {
    return false;
  }
  return !ev.saw_nonfinite();
}

/// Random binary tree of at most the given depth (a single leaf has depth 1).
inline amwp::expr::ExprTree random_tree(std::mt19937_64& rng, std::size_t max_depth, std::size_t n_slots,
                                        bool with_pow = true, double leaf_prob = 0.3) {
  using namespace amwp::expr;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (max_depth <= 1 || u(rng) < leaf_prob) {
    if (u(rng) < 0.1) return ExprTree::leaf(Token::constant(u(rng) < 0.5 ? 1.0 : 3.14159));
    return ExprTree::leaf(Token::slot(static_cast<int>(std::uniform_int_distribution<std::size_t>(0, n_slots - 1)(rng))));
  }
  const std::size_t n_ops = with_pow ? 5 : 4;
  const Operator op = kOperators[std::uniform_int_distribution<std::size_t>(0, n_ops - 1)(rng)];
  ExprTree l = random_tree(rng, max_depth - 1, n_slots, with_pow, leaf_prob);
  ExprTree r = random_tree(rng, max_depth - 1, n_slots, with_pow, leaf_prob);
  return ExprTree::node(op, std::move(l), std::move(r));
}

/// The first k operator characters of the prefix text, or nullopt when the
/// equation has fewer than k operators.
inline std::optional<std::string> text_signature(const amwp::expr::PrefixEquation& eq, std::size_t k) {
  std::string sig;
  for (const auto& tok : eq) {
    const std::string s = tok.text();
    if (s.size() == 1 && std::string("+-*/^").find(s[0]) != std::string::npos) sig += s;
    if (sig.size() == k) return sig;
  }
  return std::nullopt;
}

}  // namespace oracle
