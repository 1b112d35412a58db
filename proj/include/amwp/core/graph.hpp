#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "amwp/core/tensor.hpp"

namespace amwp::core {

using Rng = std::mt19937_64;

/// A learnable tensor plus its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor init);

  void zero_grad() { grad.fill(0.0); }
};

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  /// Gradient accumulated by Tape::backward; zeros if the node was unreachable.
  Tensor grad() const;
  const Shape& shape() const { return value().shape; }
  double item() const { return value().item(); }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* t, std::size_t id) : tape_(t), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records forward primitives and replays them in reverse for gradients.
///
/// Parameters enter the tape through param(); after backward() their
/// gradients are added into Parameter::grad unless frozen on this tape.
/// Every forward result is checked for NaN/Inf.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  explicit Tape(bool training = false) : training_(training) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool training() const { return training_; }

  Var constant(Tensor t);
  Var param(Parameter& p);
  /// Parameters frozen here enter as constants: no gradient reaches them.
  void freeze(std::span<Parameter* const> params);
  bool frozen(const Parameter& p) const { return frozen_.count(&p) != 0; }

  void backward(Var loss);
  bool backward_done() const { return backward_done_; }
  std::size_t size() const { return nodes_.size(); }

  // Primitive implementation interface.
  Var record(Tensor value, bool requires_grad, BackwardFn fn, const char* op);
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor* grad_if_any(std::size_t id) const;
  /// Gradient buffer of a node, allocated as zeros on first touch.
  Tensor& grad_ref(std::size_t id);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
    Parameter* param = nullptr;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  std::unordered_set<const Parameter*> frozen_;
  bool training_ = false;
  bool backward_done_ = false;
};

// Forward primitives. Rank-1 tensors act as row vectors in matmul.

Var matmul(Var a, Var b);
Var add(Var a, Var b);
/// Adds vector b[n] to every row of a[m,n].
Var add_row(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var one_minus(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
/// Elementwise log(sigmoid(x)), stable for large |x|.
Var log_sigmoid(Var a);
Var concat(std::span<const Var> parts);
Var slice(Var a, std::size_t begin, std::size_t len);
Var stack_rows(std::span<const Var> rows);
Var gather_row(Var table, std::size_t row);
Var softmax(Var a);
Var dot(Var a, Var b);
Var sum(Var a);
Var add_scalars(std::span<const Var> scalars);
/// -log p[target] of the softmax over allowed entries; masked entries get
/// probability exactly zero. mask may be empty (all allowed).
Var softmax_xent(Var logits, std::size_t target, std::span<const std::uint8_t> mask = {});
/// Inverted dropout; identity when the tape is not in training mode or p == 0.
Var dropout(Var a, double p, Rng& rng);

}  // namespace amwp::core
