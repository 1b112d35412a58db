#include "amwp/solver/model.hpp"

#include <stdexcept>

namespace amwp::solver {

using core::Var;

ProblemEncoder::ProblemEncoder(std::size_t vocab_size, std::size_t embed, std::size_t hidden, core::Rng& rng)
    : words_("encoder.words", vocab_size, embed, rng),
      forward_("encoder.fwd", embed, hidden / 2, rng),
      backward_("encoder.bwd", embed, hidden / 2, rng) {
  if (hidden % 2 != 0) throw std::invalid_argument("encoder hidden size must be even");
}

Encoding ProblemEncoder::encode(core::Tape& t, std::span<const int> word_ids) {
  if (word_ids.empty()) throw std::invalid_argument("cannot encode an empty word list");
  const std::vector<Var> x = words_.lookup(t, word_ids);
  const std::size_t n = x.size();
  std::vector<Var> fwd(n), bwd(n);
  Var h = forward_.zero_state(t);
  for (std::size_t i = 0; i < n; ++i) fwd[i] = h = forward_.step(t, x[i], h);
  h = backward_.zero_state(t);
  for (std::size_t i = n; i-- > 0;) bwd[i] = h = backward_.step(t, x[i], h);

  std::vector<Var> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Var pair[] = {fwd[i], bwd[i]};
    rows[i] = core::concat(pair);
  }
  const Var last[] = {fwd[n - 1], bwd[0]};
  return {core::concat(last), core::stack_rows(rows)};
}

void ProblemEncoder::collect(std::vector<core::Parameter*>& out) {
  words_.collect(out);
  forward_.collect(out);
  backward_.collect(out);
}

PrefixDecoder::PrefixDecoder(std::size_t universe_size, std::size_t embed, std::size_t hidden, core::Rng& rng)
    : tokens_("decoder.tokens", universe_size + 1, embed, rng),
      cell_("decoder.cell", embed, hidden, rng),
      w_key_("decoder.attn.w_key", core::uniform_init(hidden, hidden, hidden, rng)),
      w_query_("decoder.attn.w_query", core::uniform_init(hidden, hidden, hidden, rng)),
      v_("decoder.attn.v", core::Tensor::vector(core::uniform_init(1, hidden, hidden, rng).values)),
      combine_("decoder.combine", 2 * hidden, hidden, rng),
      out_("decoder.out", hidden, universe_size, rng) {}

Var PrefixDecoder::keys(core::Tape& t, Var states) { return core::matmul(states, t.param(w_key_)); }

Var PrefixDecoder::step(core::Tape& t, Var h, int prev_token, Var states, Var keys, Var& logits) {
  const int row = prev_token < 0 ? static_cast<int>(universe_size()) : prev_token;
  if (row > static_cast<int>(universe_size())) throw std::out_of_range("decoder token id out of range");
  const int ids[] = {row};
  h = cell_.step(t, tokens_.lookup(t, ids)[0], h);

  const Var q = core::matmul(h, t.param(w_query_));
  const Var scores = core::matmul(core::tanh(core::add_row(keys, q)), t.param(v_));
  const Var context = core::matmul(core::softmax(scores), states);
  const Var parts[] = {h, context};
  logits = out_.forward(t, core::tanh(combine_.forward(t, core::concat(parts))));
  return h;
}

void PrefixDecoder::collect(std::vector<core::Parameter*>& out) {
  tokens_.collect(out);
  cell_.collect(out);
  out.push_back(&w_key_);
  out.push_back(&w_query_);
  out.push_back(&v_);
  combine_.collect(out);
  out_.collect(out);
}

Seq2Seq::Seq2Seq(std::size_t vocab_size, std::size_t universe_size, ModelDims dims, core::Rng& rng)
    : encoder(vocab_size, dims.embed, dims.hidden, rng), decoder(universe_size, dims.embed, dims.hidden, rng), dims_(dims) {}

std::vector<core::Parameter*> Seq2Seq::encoder_parameters() {
  std::vector<core::Parameter*> out;
  encoder.collect(out);
  return out;
}

std::vector<core::Parameter*> Seq2Seq::parameters() {
  std::vector<core::Parameter*> out;
  encoder.collect(out);
  decoder.collect(out);
  return out;
}

}  // namespace amwp::solver
