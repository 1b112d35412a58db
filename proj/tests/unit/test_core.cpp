#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"

#include "amwp/core/checkpoint.hpp"
#include "amwp/core/gradcheck.hpp"
#include "amwp/core/graph.hpp"
#include "amwp/core/layers.hpp"
#include "amwp/core/optim.hpp"

using namespace amwp::core;

namespace {

Tensor random_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t = Tensor::zeros(s);
  for (double& v : t.values) v = u(rng);
  return t;
}

// Projects an arbitrary output onto fixed random weights so every output
// coordinate carries a distinct gradient.
Var project(Tape& t, Var y, std::uint64_t seed) {
  Rng rng(seed);
  return sum(mul(y, t.constant(random_tensor(y.shape(), rng))));
}

}  // namespace

TEST_CASE("forward primitive anchors") {
  Tape t;
  CHECK(sigmoid(t.constant(Tensor::scalar(0.0))).item() == doctest::Approx(0.5));

  Var a = t.constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  Var id = t.constant(Tensor::matrix(2, 2, {1, 0, 0, 1}));
  CHECK(matmul(a, id).value().values == std::vector<double>{1, 2, 3, 4});

  Var logits = t.constant(Tensor::vector(std::vector<double>(7, 0.3)));
  for (std::size_t target = 0; target < 7; ++target)
    CHECK(softmax_xent(logits, target).item() == doctest::Approx(std::log(7.0)).epsilon(1e-12));
}

TEST_CASE("masked softmax gives masked tokens zero probability") {
  Tape t;
  Parameter p("logits", Tensor::vector({0.5, 2.0, -1.0, 3.0}));
  Var l = t.param(p);
  const std::vector<std::uint8_t> mask{1, 0, 1, 0};
  Var loss = softmax_xent(l, 0, mask);
  const double z = std::exp(0.5) + std::exp(-1.0);
  CHECK(loss.item() == doctest::Approx(-std::log(std::exp(0.5) / z)));
  t.backward(loss);
  CHECK(p.grad[1] == 0.0);
  CHECK(p.grad[3] == 0.0);
  CHECK_THROWS_AS(softmax_xent(l, 1, mask), std::invalid_argument);
}

TEST_CASE("analytic derivatives") {
  {
    Parameter x("x", Tensor::scalar(3.0));
    Tape t;
    Var v = t.param(x);
    t.backward(mul(v, v));
    CHECK(x.grad.item() == doctest::Approx(6.0));
  }
  {
    Parameter x("x", Tensor::scalar(0.0));
    Tape t;
    t.backward(sigmoid(t.param(x)));
    CHECK(x.grad.item() == doctest::Approx(0.25));
  }
}

TEST_CASE("backward twice on one recording is an error") {
  Parameter x("x", Tensor::scalar(1.0));
  Tape t;
  Var y = mul(t.param(x), t.param(x));
  t.backward(y);
  CHECK_THROWS_AS(t.backward(y), std::logic_error);
}

TEST_CASE("backward requires a scalar loss") {
  Parameter x("x", Tensor::vector({1.0, 2.0}));
  Tape t;
  CHECK_THROWS_AS(t.backward(tanh(t.param(x))), ShapeError);
}

TEST_CASE("shape mismatch names the primitive and shapes") {
  Tape t;
  Var a = t.constant(Tensor::matrix(2, 3, std::vector<double>(6, 1.0)));
  Var b = t.constant(Tensor::matrix(2, 2, std::vector<double>(4, 1.0)));
  try {
    matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("matmul") != std::string::npos);
    CHECK(msg.find("[2,3]") != std::string::npos);
    CHECK(msg.find("[2,2]") != std::string::npos);
  }
  CHECK_THROWS_AS(add(a, b), ShapeError);
}

TEST_CASE("non-finite forward output is an error") {
  Tape t;
  Var big = t.constant(Tensor::scalar(1e300));
  CHECK_THROWS_AS(scale(big, 1e300), NumericError);
}

TEST_CASE("random 2-layer MLP gradients match central differences") {
  Rng rng(11);
  Linear l1("l1", 5, 7, rng);
  Linear l2("l2", 7, 3, rng);
  std::vector<Parameter*> ps;
  l1.collect(ps);
  l2.collect(ps);
  for (Parameter* p : ps)
    for (double& v : p->value.values) v = std::uniform_real_distribution<double>(-1, 1)(rng);
  const Tensor input = random_tensor(Shape{5}, rng);
  auto f = [&](Tape& t) { return project(t, l2.forward(t, tanh(l1.forward(t, t.constant(input)))), 3); };
  CHECK(finite_diff_check(f, ps, 1e-5) < 1e-4);
}

TEST_CASE("finite_diff_check anchors") {
  Rng rng(5);
  SUBCASE("sum of squares") {
    Parameter p("p", random_tensor(Shape{6}, rng));
    std::vector<Parameter*> ps{&p};
    auto f = [&](Tape& t) {
      Var v = t.param(p);
      return sum(mul(v, v));
    };
    CHECK(finite_diff_check(f, ps, 1e-5) < 1e-6);
  }
  SUBCASE("GRU step with respect to all gate weights") {
    GruCell cell("gru", 4, 5, rng);
    std::vector<Parameter*> ps;
    cell.collect(ps);
    for (Parameter* p : ps)
      for (double& v : p->value.values) v = std::uniform_real_distribution<double>(-0.8, 0.8)(rng);
    const Tensor x = random_tensor(Shape{4}, rng);
    const Tensor h = random_tensor(Shape{5}, rng);
    auto f = [&](Tape& t) { return project(t, cell.step(t, t.constant(x), t.constant(h)), 9); };
    CHECK(finite_diff_check(f, ps, 1e-5) < 1e-4);
  }
  SUBCASE("bilinear score with respect to W") {
    Parameter w("w", random_tensor(Shape{4, 4}, rng));
    std::vector<Parameter*> ps{&w};
    const Tensor a = random_tensor(Shape{4}, rng);
    const Tensor b = random_tensor(Shape{4}, rng);
    auto f = [&](Tape& t) { return dot(matmul(t.constant(a), t.param(w)), t.constant(b)); };
    CHECK(finite_diff_check(f, ps, 1e-5) < 1e-6);
  }
  SUBCASE("non-finite loss is an error") {
    Parameter p("p", Tensor::scalar(1e200));
    std::vector<Parameter*> ps{&p};
    auto f = [&](Tape& t) {
      Var v = t.param(p);
      return mul(v, v);
    };
    CHECK_THROWS_AS(finite_diff_check(f, ps, 1e-5), NumericError);
  }
}

TEST_CASE("every primitive passes the gradient check over 20 seeds") {
  using Builder = std::function<Var(Tape&, std::vector<Parameter>&)>;
  struct Case {
    const char* name;
    std::vector<Shape> shapes;
    Builder build;
  };
  const std::vector<Case> cases = {
      {"matmul vec*mat", {Shape{3}, Shape{3, 4}}, [](Tape& t, auto& p) { return matmul(t.param(p[0]), t.param(p[1])); }},
      {"matmul mat*mat", {Shape{2, 3}, Shape{3, 4}}, [](Tape& t, auto& p) { return matmul(t.param(p[0]), t.param(p[1])); }},
      {"matmul mat*vec", {Shape{2, 3}, Shape{3}}, [](Tape& t, auto& p) { return matmul(t.param(p[0]), t.param(p[1])); }},
      {"add", {Shape{4}, Shape{4}}, [](Tape& t, auto& p) { return add(t.param(p[0]), t.param(p[1])); }},
      {"add_row", {Shape{3, 4}, Shape{4}}, [](Tape& t, auto& p) { return add_row(t.param(p[0]), t.param(p[1])); }},
      {"sub", {Shape{4}, Shape{4}}, [](Tape& t, auto& p) { return sub(t.param(p[0]), t.param(p[1])); }},
      {"mul", {Shape{4}, Shape{4}}, [](Tape& t, auto& p) { return mul(t.param(p[0]), t.param(p[1])); }},
      {"scale", {Shape{4}}, [](Tape& t, auto& p) { return scale(t.param(p[0]), -1.7); }},
      {"one_minus", {Shape{4}}, [](Tape& t, auto& p) { return one_minus(t.param(p[0])); }},
      {"tanh", {Shape{4}}, [](Tape& t, auto& p) { return tanh(t.param(p[0])); }},
      {"sigmoid", {Shape{4}}, [](Tape& t, auto& p) { return sigmoid(t.param(p[0])); }},
      {"log_sigmoid", {Shape{4}}, [](Tape& t, auto& p) { return log_sigmoid(scale(t.param(p[0]), 4.0)); }},
      {"concat", {Shape{2}, Shape{3}},
       [](Tape& t, auto& p) {
         std::vector<Var> parts{t.param(p[0]), t.param(p[1])};
         return concat(parts);
       }},
      {"slice", {Shape{6}}, [](Tape& t, auto& p) { return slice(t.param(p[0]), 1, 3); }},
      {"stack_rows", {Shape{3}, Shape{3}},
       [](Tape& t, auto& p) {
         std::vector<Var> rows{t.param(p[0]), t.param(p[1]), t.param(p[0])};
         return stack_rows(rows);
       }},
      {"gather_row", {Shape{4, 3}}, [](Tape& t, auto& p) {
         std::vector<Var> rows{gather_row(t.param(p[0]), 2), gather_row(t.param(p[0]), 0), gather_row(t.param(p[0]), 2)};
         return concat(rows);
       }},
      {"softmax", {Shape{5}}, [](Tape& t, auto& p) { return softmax(t.param(p[0])); }},
      {"dot", {Shape{4}, Shape{4}}, [](Tape& t, auto& p) { return dot(t.param(p[0]), t.param(p[1])); }},
      {"sum", {Shape{2, 3}}, [](Tape& t, auto& p) { return sum(t.param(p[0])); }},
      {"add_scalars", {Shape{}, Shape{}},
       [](Tape& t, auto& p) {
         std::vector<Var> s{t.param(p[0]), t.param(p[1]), t.param(p[0])};
         return add_scalars(s);
       }},
      {"softmax_xent masked", {Shape{6}}, [](Tape& t, auto& p) {
         static const std::vector<std::uint8_t> mask{1, 1, 0, 1, 0, 1};
         return softmax_xent(t.param(p[0]), 3, mask);
       }},
  };

  for (const Case& c : cases) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed * 7919 + 1);
      std::vector<Parameter> params;
      for (std::size_t i = 0; i < c.shapes.size(); ++i)
        params.emplace_back("p" + std::to_string(i), random_tensor(c.shapes[i], rng, -2.0, 2.0));
      std::vector<Parameter*> ptrs;
      for (Parameter& p : params) ptrs.push_back(&p);
      auto f = [&](Tape& t) { return project(t, c.build(t, params), seed + 100); };
      worst = std::max(worst, finite_diff_check(f, ptrs, 1e-5));
    }
    INFO(c.name);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("gradients are linear in the loss") {
  Rng rng(3);
  Linear l1("l1", 4, 6, rng);
  std::vector<Parameter*> ps;
  l1.collect(ps);
  const Tensor x = random_tensor(Shape{4}, rng);
  auto loss_a = [&](Tape& t) { return project(t, tanh(l1.forward(t, t.constant(x))), 1); };
  auto loss_b = [&](Tape& t) { return project(t, sigmoid(l1.forward(t, t.constant(x))), 2); };

  auto grads = [&](auto build) {
    for (Parameter* p : ps) p->zero_grad();
    Tape t;
    t.backward(build(t));
    std::vector<double> g;
    for (Parameter* p : ps) g.insert(g.end(), p->grad.values.begin(), p->grad.values.end());
    return g;
  };
  const auto ga = grads(loss_a);
  const auto gb = grads(loss_b);
  const auto gsum = grads([&](Tape& t) {
    std::vector<Var> s{loss_a(t), loss_b(t)};
    return add_scalars(s);
  });
  for (std::size_t i = 0; i < gsum.size(); ++i) CHECK(std::abs(gsum[i] - (ga[i] + gb[i])) <= 1e-12);
}

TEST_CASE("dropout") {
  Rng rng(17);
  const Tensor x = Tensor::vector(std::vector<double>(10000, 1.5));
  {
    Tape t(false);
    Var in = t.constant(x);
    CHECK(dropout(in, 0.5, rng).value().values == x.values);
  }
  {
    Tape t(true);
    Var y = dropout(t.constant(x), 0.5, rng);
    const double mean = std::accumulate(y.value().values.begin(), y.value().values.end(), 0.0) / 10000.0;
    CHECK(std::abs(mean - 1.5) / 1.5 < 0.02);
    for (double v : y.value().values) CHECK((v == 0.0 || v == 3.0));
  }
}

TEST_CASE("embedding rows expose per-position gradients") {
  Rng rng(2);
  Embedding emb("emb", 5, 3, rng);
  Tape t;
  const std::vector<int> ids{4, 1, 4};
  auto rows = emb.lookup(t, ids);
  Var loss = add_scalars(std::vector<Var>{sum(scale(rows[0], 2.0)), sum(scale(rows[1], 3.0)), sum(rows[2])});
  t.backward(loss);
  CHECK(rows[0].grad().values == std::vector<double>{2, 2, 2});
  CHECK(rows[1].grad().values == std::vector<double>{3, 3, 3});
  CHECK(rows[2].grad().values == std::vector<double>{1, 1, 1});
  CHECK(emb.table().grad.at(4, 0) == 3.0);
  CHECK(emb.table().grad.at(1, 2) == 3.0);
  CHECK(emb.table().grad.at(0, 0) == 0.0);
}

TEST_CASE("frozen parameters receive no gradient") {
  Parameter w("w", Tensor::matrix(2, 2, {1, 2, 3, 4}));
  Parameter x("x", Tensor::vector({1, -1}));
  Tape t;
  std::vector<Parameter*> frozen{&w};
  t.freeze(frozen);
  t.backward(sum(matmul(t.param(x), t.param(w))));
  CHECK(w.grad.values == std::vector<double>{0, 0, 0, 0});
  CHECK(x.grad.values == std::vector<double>{3, 7});
}

TEST_CASE("AdamW") {
  SUBCASE("zero gradient only applies weight decay") {
    Parameter p("p", Tensor::scalar(2.0));
    AdamW opt({&p});
    for (int i = 0; i < 3; ++i) {
      opt.zero_grad();
      opt.step(0.1);
    }
    CHECK(p.value.item() == doctest::Approx(2.0 * std::pow(1.0 - 0.1 * 0.01, 3)).epsilon(1e-12));
    CHECK(opt.step_count() == 3);
  }
  SUBCASE("bias-corrected first step") {
    Parameter p("p", Tensor::scalar(0.0));
    AdamW opt({&p});
    opt.zero_grad();
    p.grad[0] = 1.0;
    opt.step(0.1);
    CHECK(p.value.item() == doctest::Approx(-0.1).epsilon(1e-6));
  }
  auto minimise = [](double weight_decay) {
    Parameter p("x", Tensor::scalar(10.0));
    AdamWOptions o;
    o.weight_decay = weight_decay;
    AdamW opt({&p}, o);
    for (int i = 0; i < 500; ++i) {
      opt.zero_grad();
      Tape t;
      Var x = t.param(p);
      Var d = sub(x, t.constant(Tensor::scalar(2.0)));
      t.backward(mul(d, d));
      opt.step(0.05);
    }
    return p.value.item();
  };
  SUBCASE("minimises a quadratic") {
    // Reference trajectory: torch.optim.AdamW(lr=0.05) in float64, 500 steps.
    CHECK(minimise(0.01) == doctest::Approx(1.9513601186631429).epsilon(1e-9));
    CHECK(std::abs(minimise(0.0) - 2.0) < 0.01);
  }
  SUBCASE("non-finite gradient is rejected") {
    Parameter p("p", Tensor::scalar(1.0));
    AdamW opt({&p});
    p.grad[0] = NAN;
    CHECK_THROWS_AS(opt.step(0.1), NumericError);
    CHECK(p.value.item() == 1.0);
  }
}

TEST_CASE("checkpoint round trip and shape validation") {
  Rng rng(4);
  Linear a("layer", 3, 2, rng);
  std::vector<Parameter*> ps;
  a.collect(ps);
  const nlohmann::json doc = checkpoint_document({{"hidden", 2}}, ps);
  const nlohmann::json reparsed = nlohmann::json::parse(doc.dump());
  CHECK(reparsed["config"]["hidden"] == 2);

  Linear b("layer", 3, 2, rng);
  std::vector<Parameter*> qs;
  b.collect(qs);
  restore_parameters(reparsed, qs);
  for (std::size_t i = 0; i < ps.size(); ++i) CHECK(qs[i]->value.values == ps[i]->value.values);

  Linear wrong("layer", 4, 2, rng);
  std::vector<Parameter*> ws;
  wrong.collect(ws);
  const auto before = ws[0]->value.values;
  CHECK_THROWS_AS(restore_parameters(reparsed, ws), CheckpointError);
  CHECK(ws[0]->value.values == before);

  Linear other("other", 3, 2, rng);
  std::vector<Parameter*> os;
  other.collect(os);
  CHECK_THROWS_AS(restore_parameters(reparsed, os), CheckpointError);
}

TEST_CASE("scoring MLP starts at exactly zero") {
  Rng rng(8);
  ScoringMlp mlp("head", 6, 3, rng);
  Tape t;
  Var s = mlp.forward(t, t.constant(random_tensor(Shape{6}, rng)));
  CHECK(s.item() == 0.0);
  CHECK(sigmoid(s).item() == 0.5);
}
