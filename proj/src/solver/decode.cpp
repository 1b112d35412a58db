#include "amwp/solver/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "amwp/expr/tree.hpp"

namespace amwp::solver {

using core::Var;

Encoding dropout_encoding(const Encoding& e, double p, core::Rng& rng) {
  return {core::dropout(e.problem_vec, p, rng), core::dropout(e.states, p, rng)};
}

Var seq2seq_loss(core::Tape& t, PrefixDecoder& decoder, const Encoding& enc, std::span<const int> gold_ids,
                 std::span<const std::uint8_t> mask) {
  if (gold_ids.empty()) throw std::invalid_argument("seq2seq_loss: empty gold equation");
  const Var keys = decoder.keys(t, enc.states);
  Var h = enc.problem_vec;
  int prev = -1;
  std::vector<Var> terms;
  terms.reserve(gold_ids.size());
  for (int y : gold_ids) {
    Var logits;
    h = decoder.step(t, h, prev, enc.states, keys, logits);
    terms.push_back(core::softmax_xent(logits, static_cast<std::size_t>(y), mask));
    prev = y;
  }
  return core::scale(core::add_scalars(terms), 1.0 / static_cast<double>(terms.size()));
}

namespace {

struct Open {
  std::vector<int> tokens;
  double log_prob = 0.0;
  int arity = 1;  // operands still needed
  Var h;
};

std::vector<double> masked_log_softmax(const core::Tensor& logits, std::span<const std::uint8_t> mask) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask.empty() || mask[i]) m = std::max(m, logits[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask.empty() || mask[i]) s += std::exp(logits[i] - m);
  const double lse = m + std::log(s);
  std::vector<double> out(logits.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask.empty() || mask[i]) out[i] = logits[i] - lse;
  return out;
}

bool is_operator_id(int id) { return id < static_cast<int>(expr::kOperators.size()); }

// Operators need room for one more operand than they consume.
bool can_expand(int id, const Open& o, std::size_t max_len) {
  if (!is_operator_id(id)) return true;
  return o.tokens.size() + 1 + static_cast<std::size_t>(o.arity + 1) <= max_len;
}

struct Candidate {
  double log_prob;
  std::size_t parent;
  int token;
};

}  // namespace

std::vector<Hypothesis> beam_search(Seq2Seq& model, std::span<const int> word_ids, std::span<const std::uint8_t> mask,
                                    std::size_t width, std::size_t max_len) {
  if (width < 1 || max_len < 1) throw std::invalid_argument("beam_search: width and max_len must be positive");
  core::Tape t(false);
  const Encoding enc = model.encoder.encode(t, word_ids);
  const Var keys = model.decoder.keys(t, enc.states);

  std::vector<Open> open(1);
  open[0].h = enc.problem_vec;
  std::vector<Hypothesis> done;
  auto kth_done = [&]() {
    std::vector<double> lps;
    for (const auto& d : done) lps.push_back(d.log_prob);
    std::nth_element(lps.begin(), lps.begin() + static_cast<long>(width - 1), lps.end(), std::greater<>());
    return lps[width - 1];
  };

  while (!open.empty()) {
    std::vector<Candidate> cands;
    std::vector<Var> states(open.size());
    for (std::size_t p = 0; p < open.size(); ++p) {
      const int prev = open[p].tokens.empty() ? -1 : open[p].tokens.back();
      Var logits;
      states[p] = model.decoder.step(t, open[p].h, prev, enc.states, keys, logits);
      const std::vector<double> lp = masked_log_softmax(logits.value(), mask);
      for (std::size_t id = 0; id < lp.size(); ++id) {
        if (!std::isfinite(lp[id]) || !can_expand(static_cast<int>(id), open[p], max_len)) continue;
        cands.push_back({open[p].log_prob + lp[id], p, static_cast<int>(id)});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
      if (a.parent != b.parent) return a.parent < b.parent;
      return a.token < b.token;
    });
    if (cands.size() > width) cands.resize(width);

    std::vector<Open> next;
    for (const Candidate& c : cands) {
      Open o;
      o.tokens = open[c.parent].tokens;
      o.tokens.push_back(c.token);
      o.log_prob = c.log_prob;
      o.arity = open[c.parent].arity + (is_operator_id(c.token) ? 1 : -1);
      o.h = states[c.parent];
      if (o.arity == 0) done.push_back({std::move(o.tokens), o.log_prob});
      else if (o.tokens.size() < max_len) next.push_back(std::move(o));
    }
    open = std::move(next);
    // Scores only fall as hypotheses grow, so stop once no open one can
    // enter the top `width` completions.
    if (done.size() >= width && !open.empty() && open.front().log_prob < kth_done()) break;
  }

  // Pruning can drop the greedy path in favour of prefixes that finish
  // badly; keep it as a candidate so the top result never scores below it.
  if (width > 1) {
    if (auto g = greedy_decode(model, word_ids, mask, max_len))
      if (std::none_of(done.begin(), done.end(), [&](const Hypothesis& d) { return d.tokens == g->tokens; }))
        done.push_back(std::move(*g));
  }
  std::stable_sort(done.begin(), done.end(),
                   [](const Hypothesis& a, const Hypothesis& b) { return a.log_prob > b.log_prob; });
  return done;
}

std::optional<Hypothesis> greedy_decode(Seq2Seq& model, std::span<const int> word_ids,
                                        std::span<const std::uint8_t> mask, std::size_t max_len) {
  core::Tape t(false);
  const Encoding enc = model.encoder.encode(t, word_ids);
  const Var keys = model.decoder.keys(t, enc.states);
  Open o;
  o.h = enc.problem_vec;
  while (o.tokens.size() < max_len) {
    Var logits;
    o.h = model.decoder.step(t, o.h, o.tokens.empty() ? -1 : o.tokens.back(), enc.states, keys, logits);
    const std::vector<double> lp = masked_log_softmax(logits.value(), mask);
    int best = -1;
    for (std::size_t id = 0; id < lp.size(); ++id) {
      if (!std::isfinite(lp[id]) || !can_expand(static_cast<int>(id), o, max_len)) continue;
      if (best < 0 || lp[id] > lp[static_cast<std::size_t>(best)]) best = static_cast<int>(id);
    }
    if (best < 0) return std::nullopt;
    o.tokens.push_back(best);
    o.log_prob += lp[static_cast<std::size_t>(best)];
    o.arity += is_operator_id(best) ? 1 : -1;
    if (o.arity == 0) return Hypothesis{std::move(o.tokens), o.log_prob};
  }
  return std::nullopt;
}

PreparedRecord prepare(const corpus::ProblemRecord& r, const corpus::WordVocab& vocab,
                       const corpus::DecoderUniverse& universe) {
  return {vocab.encode(r.words), universe.encode(r.gold_prefix), corpus::build_mask(r, universe)};
}

bool value_correct(std::span<const expr::Token> eq, const corpus::ProblemRecord& r) {
  if (eq.empty() || !expr::validate_prefix(eq)) return false;
  try {
    return expr::rel_close(expr::evaluate(eq, r.slot_values), r.gold_answer, corpus::kAnswerTolerance);
  } catch (const expr::EvalError&) {
    return false;
  }
}

double EvalReport::range_accuracy(std::size_t lo, std::size_t hi) const {
  std::size_t n = 0, c = 0;
  for (const auto& [ops, b] : buckets)
    if (ops >= lo && ops <= hi) n += b.count, c += b.correct;
  return n ? static_cast<double>(c) / static_cast<double>(n) : 0.0;
}

EvalReport evaluate_corpus(Seq2Seq& model, std::span<const corpus::ProblemRecord> records,
                           const corpus::WordVocab& vocab, const corpus::DecoderUniverse& universe, std::size_t width,
                           std::size_t max_len) {
  EvalReport rep;
  for (const auto& r : records) {
    const auto words = vocab.encode(r.words);
    const auto mask = corpus::build_mask(r, universe);
    const auto beams = beam_search(model, words, mask, width, max_len);
    expr::PrefixEquation eq;
    if (!beams.empty())
      for (int id : beams.front().tokens) eq.push_back(universe.token(static_cast<std::size_t>(id)));
    const bool ok = value_correct(eq, r);
    ++rep.total;
    rep.correct += ok;
    auto& b = rep.buckets[r.n_operators];
    ++b.count;
    b.correct += ok;
    rep.predictions.push_back(expr::to_text(eq));
  }
  for (auto& [ops, b] : rep.buckets)
    b.percentage = 100.0 * static_cast<double>(b.count) / static_cast<double>(rep.total);
  return rep;
}

double value_accuracy(Seq2Seq& model, std::span<const corpus::ProblemRecord> records, const corpus::WordVocab& vocab,
                      const corpus::DecoderUniverse& universe, std::size_t width) {
  return evaluate_corpus(model, records, vocab, universe, width, default_max_len(universe.max_slots())).accuracy();
}

}  // namespace amwp::solver
