#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "amwp/core/graph.hpp"

namespace amwp::core {

/// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) initialised [rows, cols] matrix.
Tensor uniform_init(std::size_t rows, std::size_t cols, std::size_t fan_in, Rng& rng);

/// y = x W + b with W of shape [in, out].
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng, bool zero_init = false);

  Var forward(Tape& t, Var x);
  void collect(std::vector<Parameter*>& out);
  std::size_t in_dim() const { return weight_.value.shape[0]; }
  std::size_t out_dim() const { return weight_.value.shape[1]; }

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  Parameter weight_;
  Parameter bias_;
};

class Embedding {
 public:
  Embedding() = default;
  Embedding(const std::string& name, std::size_t rows, std::size_t dim, Rng& rng);

  /// One gathered row per id; each row's gradient is readable after backward.
  std::vector<Var> lookup(Tape& t, std::span<const int> ids);
  void collect(std::vector<Parameter*>& out);
  std::size_t rows() const { return table_.value.shape[0]; }
  std::size_t dim() const { return table_.value.shape[1]; }

  Parameter& table() { return table_; }

 private:
  Parameter table_;
};

/// GRU cell with fused gate matrices laid out [reset | update | candidate].
class GruCell {
 public:
  GruCell() = default;
  GruCell(const std::string& name, std::size_t in, std::size_t hidden, Rng& rng);

  Var step(Tape& t, Var x, Var h);
  Var zero_state(Tape& t) const;
  void collect(std::vector<Parameter*>& out);
  std::size_t hidden() const { return w_h_.value.shape[0]; }
  std::size_t input() const { return w_in_.value.shape[0]; }

 private:
  Parameter w_in_;
  Parameter w_h_;
  Parameter b_in_;
  Parameter b_h_;
};

/// Two-layer scoring MLP: in -> hidden (tanh) -> 1, output layer zero-initialised.
class ScoringMlp {
 public:
  ScoringMlp() = default;
  ScoringMlp(const std::string& name, std::size_t in, std::size_t hidden, Rng& rng);

  /// Raw logit as a scalar Var.
  Var forward(Tape& t, Var x);
  void collect(std::vector<Parameter*>& out);
  std::size_t in_dim() const { return hidden_.in_dim(); }

 private:
  Linear hidden_;
  Linear output_;
};

}  // namespace amwp::core
