#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "support/oracles.hpp"

#include "amwp/analogy/analogy.hpp"
#include "amwp/core/gradcheck.hpp"
#include "amwp/core/optim.hpp"
#include "amwp/corpus/synthetic.hpp"

using namespace amwp;
using namespace amwp::analogy;
using core::Tape;
using core::Tensor;
using core::Var;
using expr::parse_prefix_text;

namespace {

std::vector<expr::PrefixEquation> equations(std::initializer_list<const char*> texts) {
  std::vector<expr::PrefixEquation> out;
  for (const char* t : texts) out.push_back(parse_prefix_text(t));
  return out;
}

Tensor random_vector(std::size_t n, core::Rng& rng, double centre = 0.0, double spread = 1.0) {
  std::normal_distribution<double> d(centre, spread);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return Tensor::vector(v);
}

const std::size_t kLevels12[] = {1, 2};

}  // namespace

TEST_CASE("build_index buckets") {
  const auto eqs = equations({"/ - N0 N1 N2", "/ - N3 N4 N5", "+ N0 N1", "/ + N0 N1 N2"});
  const SignatureIndex idx(eqs, 3, false);
  for (std::size_t k : {1, 2}) CHECK(*idx.signature(k, 0) == *idx.signature(k, 1));
  CHECK(idx.signature(1, 2).has_value());
  CHECK_FALSE(idx.signature(2, 2).has_value());
  CHECK(idx.bucket_of(2, 2).empty());
  CHECK(idx.bucket_of(1, 3).size() == 3);
  CHECK(idx.bucket_of(2, 3).size() == 1);
}

TEST_CASE("build_index agrees with brute-force pairwise comparison") {
  corpus::SyntheticConfig cfg;
  cfg.n_problems = 200;
  cfg.seed = 11;
  const auto recs = corpus::generate_synthetic(cfg);
  const SignatureIndex idx = build_index(recs);
  for (std::size_t k : {1, 2}) {
    std::set<std::pair<std::size_t, std::size_t>> brute, indexed;
    for (std::size_t i = 0; i < recs.size(); ++i)
      for (std::size_t j = i + 1; j < recs.size(); ++j) {
        const auto a = oracle::text_signature(recs[i].gold_prefix, k), b = oracle::text_signature(recs[j].gold_prefix, k);
        if (a && b && *a == *b) brute.emplace(i, j);
      }
    std::size_t members = 0;
    for (const auto& [sig, ids] : idx.buckets(k)) {
      members += ids.size();
      for (std::size_t x = 0; x < ids.size(); ++x)
        for (std::size_t y = x + 1; y < ids.size(); ++y) indexed.emplace(std::min(ids[x], ids[y]), std::max(ids[x], ids[y]));
    }
    CHECK(indexed == brute);
    // every problem with at least k operators sits in exactly one bucket
    std::size_t eligible = 0;
    for (const auto& r : recs) eligible += r.n_operators >= k;
    CHECK(members == eligible);
  }
}

TEST_CASE("sample_pairs") {
  core::Rng rng(5);
  SUBCASE("single root operator gives no level-1 negatives") {
    const SignatureIndex idx(equations({"+ N0 N1", "+ N1 N0", "+ * N0 N1 N2", "+ N0 - N1 N2"}), 3, false);
    const std::size_t batch[] = {0, 1, 2, 3};
    const std::size_t level1[] = {1};
    const PairBatch pb = sample_pairs(idx, batch, 1, level1, rng);
    CHECK(pb.count(false) == 0);
    CHECK(pb.count(true) > 0);
  }
  SUBCASE("singleton bucket gives no positives") {
    const SignatureIndex idx(equations({"^ N0 N1", "+ N0 N1", "+ N1 N0"}), 3, false);
    const std::size_t batch[] = {0};
    const std::size_t level1[] = {1};
    const PairBatch pb = sample_pairs(idx, batch, 2, level1, rng);
    CHECK(pb.count(true) == 0);
    CHECK(pb.count(false) == 2);
  }
  SUBCASE("sampled pairs respect signatures") {
    corpus::SyntheticConfig cfg;
    cfg.n_problems = 300;
    const auto recs = corpus::generate_synthetic(cfg);
    const SignatureIndex idx = build_index(recs);
    std::uniform_int_distribution<std::size_t> pick(0, recs.size() - 1);
    std::size_t checked = 0;
    while (checked < 10000) {
      std::vector<std::size_t> batch(32);
      for (auto& b : batch) b = pick(rng);
      const PairBatch pb = sample_pairs(idx, batch, 1, kLevels12, rng);
      for (const auto& [k, pairs] : pb.by_level) {
        std::set<Pair> uniq(pairs.begin(), pairs.end());
        CHECK(uniq.size() == pairs.size());
        for (const Pair& p : pairs) {
          REQUIRE(p.a < p.b);
          const auto& sa = idx.signature(k, p.a);
          const auto& sb = idx.signature(k, p.b);
          REQUIRE((sa && sb));
          CHECK((*sa == *sb) == p.positive);
          ++checked;
        }
      }
    }
  }
  SUBCASE("partners restricted to a pool") {
    const SignatureIndex idx(equations({"+ N0 N1", "+ N1 N0", "+ N0 N2", "- N0 N1", "- N1 N0"}), 3, false);
    const std::size_t batch[] = {0};
    const std::size_t pool[] = {0, 2, 3};
    const std::size_t level1[] = {1};
    for (int i = 0; i < 50; ++i) {
      const PairBatch pb = sample_pairs(idx, batch, 1, level1, rng, pool);
      for (const Pair& p : pb.by_level.at(1)) CHECK((p.b == 2 || p.b == 3));
    }
  }
  CHECK_THROWS(sample_pairs(SignatureIndex{}, {}, 0, kLevels12, rng));
}

TEST_CASE("analogy score and loss") {
  core::Rng rng(1);
  const std::size_t H = 6;
  AnalogyHeads heads(H, kLevels12, rng);
  const Tensor a = random_vector(H, rng), b = random_vector(H, rng);

  Tape t;
  CHECK(analogy_score(t, t.constant(a), t.constant(b), heads.head(1)).item() == 0.5);
  CHECK_THROWS_AS(analogy_score(t, t.constant(a), t.constant(random_vector(H + 1, rng)), heads.head(1)),
                  core::ShapeError);
  CHECK_THROWS_AS(analogy_score(t, t.constant(random_vector(H + 1, rng)), t.constant(random_vector(H + 1, rng)),
                                heads.head(1)),
                  core::ShapeError);

  PairBatch pb;
  pb.by_level[1] = {{0, 1, true}, {0, 2, false}};
  std::unordered_map<std::size_t, Var> enc{{0, t.constant(a)}, {1, t.constant(b)}, {2, t.constant(random_vector(H, rng))}};
  CHECK(analogy_loss(t, pb, enc, heads).item() == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
  CHECK(analogy_loss(t, PairBatch{}, enc, heads).item() == 0.0);
  pb.by_level[1].push_back({1, 3, true});
  CHECK_THROWS_AS(analogy_loss(t, pb, enc, heads), std::invalid_argument);

  // Make the output layer non-zero so every weight carries gradient.
  std::vector<core::Parameter*> params;
  heads.collect(params);
  std::normal_distribution<double> noise(0.0, 0.5);
  for (auto* p : params)
    for (double& v : p->value.values) v = noise(rng);
  for (int seed = 0; seed < 5; ++seed) {
    core::Rng r(100 + seed);
    const Tensor x = random_vector(H, r), y = random_vector(H, r);
    const double err = core::finite_diff_check(
        [&](Tape& tp) { return analogy_score(tp, tp.constant(x), tp.constant(y), heads.head(2)); }, params);
    CHECK(err < 1e-4);
  }
  Tape t2, t3;
  CHECK(analogy_score(t2, t2.constant(a), t2.constant(b), heads.head(1)).item() ==
        analogy_score(t3, t3.constant(a), t3.constant(b), heads.head(1)).item());
}

TEST_CASE("analogy heads separate a two-bucket toy corpus") {
  core::Rng rng(3);
  const std::size_t H = 8;
  // Two cluster centres; encodings are noisy copies of their bucket's centre.
  const Tensor centre[2] = {random_vector(H, rng), random_vector(H, rng)};
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<Tensor> enc;
  std::vector<expr::PrefixEquation> eqs;
  for (int i = 0; i < 16; ++i) {
    const bool plus = i % 2 == 0;
    Tensor v = centre[plus ? 0 : 1];
    for (double& x : v.values) x += noise(rng);
    enc.push_back(v);
    eqs.push_back(parse_prefix_text(plus ? "+ N0 N1" : "* N0 N1"));
  }
  const SignatureIndex idx(eqs, 1, false);
  const std::size_t level1[] = {1};
  AnalogyHeads heads(H, level1, rng);
  std::vector<core::Parameter*> params;
  heads.collect(params);
  core::AdamW opt(params);
  std::vector<std::size_t> all(16);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  for (int step = 0; step < 200; ++step) {
    const PairBatch pb = sample_pairs(idx, all, 1, level1, rng);
    Tape t(true);
    std::unordered_map<std::size_t, Var> vars;
    for (std::size_t i = 0; i < enc.size(); ++i) vars.emplace(i, t.constant(enc[i]));
    opt.zero_grad();
    t.backward(analogy_loss(t, pb, vars, heads));
    opt.step(0.01);
  }

  double pos = 0, neg = 0;
  int npos = 0, nneg = 0;
  for (std::size_t i = 0; i < enc.size(); ++i)
    for (std::size_t j = i + 1; j < enc.size(); ++j) {
      Tape t;
      const double s = analogy_score(t, t.constant(enc[i]), t.constant(enc[j]), heads.head(1)).item();
      if (i % 2 == j % 2) pos += s, ++npos;
      else neg += s, ++nneg;
    }
  CHECK(pos / npos > 0.9);
  CHECK(neg / nneg < 0.1);
}
