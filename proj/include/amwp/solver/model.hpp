#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "amwp/core/graph.hpp"
#include "amwp/core/layers.hpp"

namespace amwp::solver {

struct ModelDims {
  std::size_t embed = 64;
  std::size_t hidden = 128;
};

struct Encoding {
  /// Concatenated final forward and backward states, [H].
  core::Var problem_vec;
  /// Per-token [forward : backward] states, [T, H].
  core::Var states;
};

/// Word embeddings followed by a bidirectional GRU with H/2 units per direction.
class ProblemEncoder {
 public:
  ProblemEncoder() = default;
  ProblemEncoder(std::size_t vocab_size, std::size_t embed, std::size_t hidden, core::Rng& rng);

  /// Throws std::invalid_argument for an empty word list.
  Encoding encode(core::Tape& t, std::span<const int> word_ids);
  void collect(std::vector<core::Parameter*>& out);
  std::size_t hidden() const { return 2 * forward_.hidden(); }

 private:
  core::Embedding words_;
  core::GruCell forward_;
  core::GruCell backward_;
};

/// GRU decoder over the decoder universe with additive attention. The
/// state starts at the problem vector; the first input is a GO row that sits
/// after the universe in the token table.
class PrefixDecoder {
 public:
  PrefixDecoder() = default;
  PrefixDecoder(std::size_t universe_size, std::size_t embed, std::size_t hidden, core::Rng& rng);

  /// Attention keys, computed once per problem.
  core::Var keys(core::Tape& t, core::Var states);
  /// Advances the state with the previous token (-1 for GO) and returns the
  /// new state; `logits` receives unnormalised scores over the universe.
  core::Var step(core::Tape& t, core::Var h, int prev_token, core::Var states, core::Var keys, core::Var& logits);
  void collect(std::vector<core::Parameter*>& out);
  std::size_t universe_size() const { return out_.out_dim(); }

 private:
  core::Embedding tokens_;
  core::GruCell cell_;
  core::Parameter w_key_;
  core::Parameter w_query_;
  core::Parameter v_;
  core::Linear combine_;
  core::Linear out_;
};

class Seq2Seq {
 public:
  Seq2Seq() = default;
  Seq2Seq(std::size_t vocab_size, std::size_t universe_size, ModelDims dims, core::Rng& rng);

  ProblemEncoder encoder;
  PrefixDecoder decoder;

  ModelDims dims() const { return dims_; }
  std::vector<core::Parameter*> encoder_parameters();
  std::vector<core::Parameter*> parameters();

 private:
  ModelDims dims_;
};

}  // namespace amwp::solver
