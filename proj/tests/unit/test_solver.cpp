#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

#include "amwp/core/gradcheck.hpp"
#include "amwp/core/optim.hpp"
#include "amwp/corpus/synthetic.hpp"
#include "amwp/expr/tree.hpp"
#include "amwp/solver/decode.hpp"

using namespace amwp;
using namespace amwp::solver;
using core::Tape;
using core::Var;

namespace {

core::Parameter& param(Seq2Seq& m, const std::string& name) {
  for (auto* p : m.parameters())
    if (p->name == name) return *p;
  throw std::runtime_error("no parameter " + name);
}

struct Fixture {
  std::vector<corpus::ProblemRecord> records;
  corpus::WordVocab vocab;
  corpus::DecoderUniverse universe;

  explicit Fixture(std::size_t n = 60, std::uint64_t seed = 1) {
    corpus::SyntheticConfig cfg;
    cfg.n_problems = n;
    cfg.seed = seed;
    records = corpus::generate_synthetic(cfg);
    vocab = corpus::WordVocab::build(records);
  }

  Seq2Seq model(std::uint64_t seed, ModelDims dims = {8, 16}) {
    core::Rng rng(seed);
    return Seq2Seq(vocab.size(), universe.size(), dims, rng);
  }
};

expr::PrefixEquation to_equation(const Hypothesis& h, const corpus::DecoderUniverse& u) {
  expr::PrefixEquation eq;
  for (int id : h.tokens) eq.push_back(u.token(static_cast<std::size_t>(id)));
  return eq;
}

}  // namespace

TEST_CASE("problem encoder") {
  Fixture f;
  Seq2Seq m = f.model(3);
  const auto words = f.vocab.encode(f.records[0].words);
  Tape a, b;
  const Encoding ea = m.encoder.encode(a, words);
  const Encoding eb = m.encoder.encode(b, words);
  CHECK(ea.problem_vec.value().values == eb.problem_vec.value().values);
  CHECK(ea.problem_vec.shape() == core::Shape{16});
  CHECK(ea.states.shape() == core::Shape{words.size(), 16});
  CHECK_THROWS_AS(m.encoder.encode(a, std::vector<int>{}), std::invalid_argument);

  // Swapping two non-adjacent words changes the encoding.
  for (std::size_t r = 0; r < 10; ++r) {
    auto w = f.vocab.encode(f.records[r].words);
    std::size_t i = 0, j = 2;
    while (j < w.size() && w[i] == w[j]) ++j;
    REQUIRE(j < w.size());
    Tape t1, t2;
    const auto v1 = m.encoder.encode(t1, w).problem_vec.value().values;
    std::swap(w[i], w[j]);
    const auto v2 = m.encoder.encode(t2, w).problem_vec.value().values;
    CHECK(v1 != v2);
  }
}

TEST_CASE("seq2seq loss") {
  Fixture f;
  Seq2Seq m = f.model(4);
  corpus::ProblemRecord r = f.records[0];
  r.slot_values.resize(2);
  r.gold_prefix = expr::parse_prefix_text("+ N0 N1");
  const PreparedRecord p = prepare(r, f.vocab, f.universe);
  REQUIRE(std::count(p.mask.begin(), p.mask.end(), 1) == 9);

  SUBCASE("uniform over 9 allowed tokens") {
    param(m, "decoder.out.weight").value.fill(0.0);
    Tape t;
    const Var loss = seq2seq_loss(t, m.decoder, m.encoder.encode(t, p.word_ids), p.gold_ids, p.mask);
    CHECK(loss.item() == doctest::Approx(std::log(9.0)).epsilon(1e-12));
  }
  SUBCASE("certain gold token") {
    param(m, "decoder.out.weight").value.fill(0.0);
    param(m, "decoder.out.bias").value[static_cast<std::size_t>(f.universe.id(expr::Token::slot(0)))] = 1e3;
    corpus::ProblemRecord one = r;
    one.gold_prefix = expr::parse_prefix_text("N0");
    const PreparedRecord q = prepare(one, f.vocab, f.universe);
    Tape t;
    CHECK(seq2seq_loss(t, m.decoder, m.encoder.encode(t, q.word_ids), q.gold_ids, q.mask).item() < 1e-12);
  }
  SUBCASE("masked gold token is an error") {
    std::vector<std::uint8_t> mask = p.mask;
    mask[static_cast<std::size_t>(p.gold_ids[1])] = 0;
    Tape t;
    CHECK_THROWS_AS(seq2seq_loss(t, m.decoder, m.encoder.encode(t, p.word_ids), p.gold_ids, mask),
                    std::invalid_argument);
  }
  SUBCASE("gradients match finite differences") {
    const auto params = m.parameters();
    const double err = core::finite_diff_check(
        [&](Tape& t) { return seq2seq_loss(t, m.decoder, m.encoder.encode(t, p.word_ids), p.gold_ids, p.mask); },
        params);
    CHECK(err < 1e-4);
    const auto enc_params = m.encoder_parameters();
    const double enc_err =
        core::finite_diff_check([&](Tape& t) { return core::sum(m.encoder.encode(t, p.word_ids).problem_vec); },
                                enc_params);
    CHECK(enc_err < 1e-4);
  }
  SUBCASE("overfits a single record") {
    const PreparedRecord q = prepare(f.records[5], f.vocab, f.universe);
    auto params = m.parameters();
    core::AdamW opt(params);
    double last = 0.0;
    for (int step = 0; step < 200; ++step) {
      Tape t(true);
      const Var loss = seq2seq_loss(t, m.decoder, m.encoder.encode(t, q.word_ids), q.gold_ids, q.mask);
      opt.zero_grad();
      t.backward(loss);
      opt.step(0.01);
      last = loss.item();
    }
    CHECK(last < 0.01);
  }
}

TEST_CASE("beam search") {
  Fixture f(100, 2);
  const std::size_t max_len = default_max_len(f.universe.max_slots());

  SUBCASE("width 1 is greedy and outputs are valid") {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      Seq2Seq m = f.model(seed);
      const auto& r = f.records[seed % f.records.size()];
      const PreparedRecord p = prepare(r, f.vocab, f.universe);
      const std::size_t len = seed % 2 ? max_len : 7;
      const auto beams = beam_search(m, p.word_ids, p.mask, 5, len);
      for (const auto& h : beams) {
        REQUIRE(expr::validate_prefix(to_equation(h, f.universe)));
        CHECK(h.tokens.size() <= len);
        for (int id : h.tokens) CHECK(p.mask[static_cast<std::size_t>(id)] == 1);
      }
      for (std::size_t i = 1; i < beams.size(); ++i) CHECK(beams[i - 1].log_prob >= beams[i].log_prob);
      if (seed < 200) {
        const auto one = beam_search(m, p.word_ids, p.mask, 1, len);
        const auto greedy = greedy_decode(m, p.word_ids, p.mask, len);
        REQUIRE(one.size() == static_cast<std::size_t>(greedy.has_value()));
        if (greedy) {
          CHECK(one[0].tokens == greedy->tokens);
          CHECK(one[0].log_prob == greedy->log_prob);
        }
      }
    }
  }

  SUBCASE("top beam scores at least the greedy path") {
    int compared = 0;
    for (std::size_t i = 0; i < 100; ++i) {
      Seq2Seq m = f.model(5000 + i);
      const PreparedRecord p = prepare(f.records[i], f.vocab, f.universe);
      const auto beams = beam_search(m, p.word_ids, p.mask, 5, max_len);
      const auto greedy = greedy_decode(m, p.word_ids, p.mask, max_len);
      if (!greedy) continue;
      REQUIRE(!beams.empty());
      CHECK(beams.front().log_prob >= greedy->log_prob);
      ++compared;
    }
    CHECK(compared > 90);
  }

  SUBCASE("degenerate limits") {
    Seq2Seq m = f.model(9);
    const PreparedRecord p = prepare(f.records[0], f.vocab, f.universe);
    for (const auto& h : beam_search(m, p.word_ids, p.mask, 5, 1)) CHECK(h.tokens.size() == 1);
    std::vector<std::uint8_t> ops_only(f.universe.size(), 0);
    std::fill(ops_only.begin(), ops_only.begin() + 5, 1);
    CHECK(beam_search(m, p.word_ids, ops_only, 5, max_len).empty());
    CHECK_THROWS_AS(beam_search(m, p.word_ids, p.mask, 0, max_len), std::invalid_argument);
  }
}

TEST_CASE("value accuracy") {
  Fixture f(40, 3);
  std::vector<corpus::ProblemRecord> recs;
  for (auto r : f.records) {
    r.gold_prefix = expr::parse_prefix_text("N0");
    r.gold_answer = r.slot_values[0];
    r.n_operators = 0;
    recs.push_back(r);
  }
  Seq2Seq m = f.model(1);
  param(m, "decoder.out.weight").value.fill(0.0);
  param(m, "decoder.out.bias").value[static_cast<std::size_t>(f.universe.id(expr::Token::slot(0)))] = 50.0;
  CHECK(value_accuracy(m, recs, f.vocab, f.universe) == 1.0);

  param(m, "decoder.out.bias").value[static_cast<std::size_t>(f.universe.id(expr::Token::slot(0)))] = 0.0;
  param(m, "decoder.out.bias").value[static_cast<std::size_t>(f.universe.id(expr::Token::slot(1)))] = 50.0;
  const EvalReport rep = evaluate_corpus(m, recs, f.vocab, f.universe, 5, 21);
  CHECK(rep.total == recs.size());
  CHECK(rep.buckets.at(0).count == recs.size());
  CHECK(rep.buckets.at(0).percentage == 100.0);
  CHECK(rep.accuracy() < 1.0);

  corpus::ProblemRecord r;
  r.slot_values = {2, 2};
  r.gold_prefix = expr::parse_prefix_text("+ N0 N1");
  r.gold_answer = 4;
  CHECK(value_correct(expr::parse_prefix_text("* N0 N1"), r));
  CHECK_FALSE(value_correct(expr::parse_prefix_text("- N0 N1"), r));
  CHECK_FALSE(value_correct({}, r));
  r.slot_values = {2, 0};
  CHECK_FALSE(value_correct(expr::parse_prefix_text("/ N0 N1"), r));
}
