#include <cmath>
#include <random>

#include "doctest.h"
#include "support/oracles.hpp"

#include "amwp/expr/infix.hpp"
#include "amwp/expr/signature.hpp"
#include "amwp/expr/tree.hpp"

using namespace amwp::expr;

namespace {

PrefixEquation P(const char* text) { return parse_prefix_text(text); }

}  // namespace

TEST_CASE("validate_prefix") {
  CHECK(validate_prefix(P("+ N0 N1")));
  CHECK_FALSE(validate_prefix(P("+ N0")));
  CHECK_FALSE(validate_prefix(P("N0 N1 +")));
  CHECK(validate_prefix(P("N0")));
  CHECK_FALSE(validate_prefix(PrefixEquation{}));
  CHECK_FALSE(validate_prefix(P("N0 N1")));
}

TEST_CASE("prefix and tree conversion") {
  const PrefixEquation eq = P("/ - N0 N1 N2");
  const ExprTree t = prefix_to_tree(eq);
  CHECK(t.token == Token::op(Operator::Div));
  CHECK(t.left().token == Token::op(Operator::Sub));
  CHECK(t.left().left().token == Token::slot(0));
  CHECK(t.left().right().token == Token::slot(1));
  CHECK(t.right().is_leaf());
  CHECK(t.right().token == Token::slot(2));
  CHECK(tree_to_prefix(t) == eq);

  const ExprTree single = prefix_to_tree(P("N0"));
  CHECK(single.is_leaf());
  CHECK_THROWS_AS(prefix_to_tree(P("+ N0")), InvalidPrefix);
}

TEST_CASE("round trip on random trees") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 1000; ++i) {
    const ExprTree t = oracle::random_tree(rng, 5, 4);
    const PrefixEquation eq = tree_to_prefix(t);
    REQUIRE(validate_prefix(eq));
    CHECK(prefix_to_tree(eq) == t);
    CHECK(tree_to_prefix(prefix_to_tree(eq)) == eq);
    CHECK(parse_prefix_text(to_text(eq)) == eq);
  }
}

TEST_CASE("evaluate") {
  const std::vector<double> s1{100, 10, 15};
  CHECK(evaluate(prefix_to_tree(P("/ - N0 N1 N2")), s1) == doctest::Approx(6.0));
  CHECK(evaluate(P("/ - N0 N1 N2"), s1) == doctest::Approx(6.0));
  const std::vector<double> s2{2, 10};
  CHECK(evaluate(P("^ N0 N1"), s2) == 1024.0);

  const std::vector<double> s3{1, 0};
  try {
    evaluate(P("/ N0 N1"), s3);
    FAIL("expected DivisionByZero");
  } catch (const EvalError& e) {
    CHECK(e.kind() == EvalError::Kind::DivisionByZero);
  }
  try {
    evaluate(P("+ N0 N5"), s3);
    FAIL("expected UnboundSlot");
  } catch (const EvalError& e) {
    CHECK(e.kind() == EvalError::Kind::UnboundSlot);
  }
  const std::vector<double> s4{1e200, 1e200};
  try {
    evaluate(P("* N0 N1"), s4);
    FAIL("expected NonFinite");
  } catch (const EvalError& e) {
    CHECK(e.kind() == EvalError::Kind::NonFinite);
  }
}

TEST_CASE("parse_infix") {
  const std::vector<double> slots{100, 10, 15};
  CHECK(tree_to_prefix(parse_infix("(100-10)/15", slots)) == P("/ - N0 N1 N2"));
  CHECK(tree_to_prefix(parse_infix("x=(100−10)/15", slots)) == P("/ - N0 N1 N2"));
  CHECK(tree_to_prefix(parse_infix(" X = (N0 - N1) ÷ N2", slots)) == P("/ - N0 N1 N2"));

  CHECK(evaluate(parse_infix("2^3^2", {}), std::vector<double>{}) == 512.0);
  CHECK(evaluate(parse_infix("8-2-1", {}), std::vector<double>{}) == 5.0);
  CHECK(evaluate(parse_infix("8/2/2", {}), std::vector<double>{}) == 2.0);
  CHECK(evaluate(parse_infix("2+3*4", {}), std::vector<double>{}) == 14.0);

  const std::vector<double> five{5};
  const ExprTree t = parse_infix("3.14*N0", five);
  CHECK(t.left().token.kind() == Token::Kind::Constant);
  CHECK(t.left().token.value() == 3.14);
  CHECK(t.right().token == Token::slot(0));

  // earliest slot wins for duplicated values
  const std::vector<double> dup{5, 5};
  CHECK(tree_to_prefix(parse_infix("5+5", dup)) == P("+ N0 N0"));
  // percent literal
  const std::vector<double> pct{0.25, 8};
  CHECK(tree_to_prefix(parse_infix("25%*8", pct)) == P("* N0 N1"));
}

TEST_CASE("parse_infix errors carry a position") {
  for (const char* bad : {"(1+2", "1+", "1 2", "1+*2", "", "-(1+2)", "1+a"}) {
    INFO(bad);
    CHECK_THROWS_AS(parse_infix(bad, {}), ParseError);
  }
  try {
    parse_infix("12+*3", {});
  } catch (const ParseError& e) {
    CHECK(e.position() == 3);
  }
}

TEST_CASE("prefix evaluation agrees with the infix oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> val(0.5, 9.5);
  int compared = 0;
  for (int i = 0; i < 1000; ++i) {
    const ExprTree t = oracle::random_tree(rng, 5, 5);
    std::vector<double> slots(5);
    for (double& v : slots) v = std::round(val(rng) * 100) / 100;
    const std::string infix = to_infix(t);
    const PrefixEquation eq = tree_to_prefix(parse_infix(infix, slots));
    CHECK(validate_prefix(eq));

    double expected = 0.0;
    if (oracle::eval_infix(infix, slots, expected)) {
      const double got = evaluate(eq, slots);
      CHECK(rel_close(got, expected, 1e-9));
      ++compared;
    } else {
      CHECK_THROWS_AS(evaluate(eq, slots), EvalError);
    }
  }
  CHECK(compared > 800);
}

TEST_CASE("to_infix keeps tree shape") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 500; ++i) {
    const ExprTree t = oracle::random_tree(rng, 5, 3);
    CHECK(parse_infix(to_infix(t), {}) == t);
  }
}

TEST_CASE("signature") {
  CHECK(signature(P("/ - N0 N1 N2"), 2)->ops == std::vector<Operator>{Operator::Div, Operator::Sub});
  CHECK_FALSE(signature(P("+ N0 N1"), 2).has_value());
  CHECK(signature(P("* + N0 N1 - N2 N3"), 2)->ops == std::vector<Operator>{Operator::Mul, Operator::Add});
  CHECK_FALSE(signature(P("N0"), 1).has_value());

  // strict mode requires the second operator to be the root's left child
  CHECK(signature(P("* N0 + N1 N2"), 2)->ops == std::vector<Operator>{Operator::Mul, Operator::Add});
  CHECK_FALSE(signature(P("* N0 + N1 N2"), 2, true).has_value());
  CHECK(signature(P("* + N1 N2 N0"), 2, true).has_value());
}

TEST_CASE("signature properties on random trees") {
  std::mt19937_64 rng(77);
  std::vector<PrefixEquation> eqs;
  for (int i = 0; i < 300; ++i) eqs.push_back(tree_to_prefix(oracle::random_tree(rng, 5, 4)));
  for (const auto& e : eqs) {
    if (count_operators(e) >= 1) CHECK(signature(e, 1)->ops[0] == e[0].oper());
    else CHECK_FALSE(signature(e, 1).has_value());
  }
  for (std::size_t i = 0; i < 60; ++i)
    for (std::size_t j = 0; j < eqs.size(); ++j) {
      const auto a2 = signature(eqs[i], 2), b2 = signature(eqs[j], 2);
      if (a2 && b2 && *a2 == *b2) CHECK(*signature(eqs[i], 1) == *signature(eqs[j], 1));
    }
}
