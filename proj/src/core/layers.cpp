#include "amwp/core/layers.hpp"

#include <cmath>

namespace amwp::core {

Tensor uniform_init(std::size_t rows, std::size_t cols, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  std::vector<double> v(rows * cols);
  for (double& x : v) x = u(rng);
  return Tensor::matrix(rows, cols, std::move(v));
}

Linear::Linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng, bool zero_init)
    : weight_(name + ".weight", zero_init ? Tensor::zeros(Shape{in, out}) : uniform_init(in, out, in, rng)),
      bias_(name + ".bias", Tensor::zeros(Shape{out})) {}

Var Linear::forward(Tape& t, Var x) { return add(matmul(x, t.param(weight_)), t.param(bias_)); }

void Linear::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// Lookup tables have one-hot inputs, so fan_in is 1.
Embedding::Embedding(const std::string& name, std::size_t rows, std::size_t dim, Rng& rng)
    : table_(name + ".table", uniform_init(rows, dim, 1, rng)) {}

std::vector<Var> Embedding::lookup(Tape& t, std::span<const int> ids) {
  Var table = t.param(table_);
  std::vector<Var> rows;
  rows.reserve(ids.size());
  for (int id : ids) {
    if (id < 0) throw ShapeError("embedding " + table_.name + ": negative id");
    rows.push_back(gather_row(table, static_cast<std::size_t>(id)));
  }
  return rows;
}

void Embedding::collect(std::vector<Parameter*>& out) { out.push_back(&table_); }

GruCell::GruCell(const std::string& name, std::size_t in, std::size_t hidden, Rng& rng)
    : w_in_(name + ".w_in", uniform_init(in, 3 * hidden, in, rng)),
      w_h_(name + ".w_h", uniform_init(hidden, 3 * hidden, hidden, rng)),
      b_in_(name + ".b_in", Tensor::zeros(Shape{3 * hidden})),
      b_h_(name + ".b_h", Tensor::zeros(Shape{3 * hidden})) {}

Var GruCell::step(Tape& t, Var x, Var h) {
  const std::size_t H = hidden();
  Var gi = add(matmul(x, t.param(w_in_)), t.param(b_in_));
  Var gh = add(matmul(h, t.param(w_h_)), t.param(b_h_));
  Var r = sigmoid(add(slice(gi, 0, H), slice(gh, 0, H)));
  Var z = sigmoid(add(slice(gi, H, H), slice(gh, H, H)));
  Var n = tanh(add(slice(gi, 2 * H, H), mul(r, slice(gh, 2 * H, H))));
  return add(mul(one_minus(z), n), mul(z, h));
}

Var GruCell::zero_state(Tape& t) const { return t.constant(Tensor::zeros(Shape{hidden()})); }

void GruCell::collect(std::vector<Parameter*>& out) {
  out.push_back(&w_in_);
  out.push_back(&w_h_);
  out.push_back(&b_in_);
  out.push_back(&b_h_);
}

ScoringMlp::ScoringMlp(const std::string& name, std::size_t in, std::size_t hidden, Rng& rng)
    : hidden_(name + ".hidden", in, hidden, rng), output_(name + ".output", hidden, 1, rng, true) {}

Var ScoringMlp::forward(Tape& t, Var x) { return sum(output_.forward(t, tanh(hidden_.forward(t, x)))); }

void ScoringMlp::collect(std::vector<Parameter*>& out) {
  hidden_.collect(out);
  output_.collect(out);
}

}  // namespace amwp::core
