#include "amwp/core/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amwp::core {

Parameter::Parameter(std::string n, Tensor init)
    : name(std::move(n)), value(std::move(init)), grad(Tensor::zeros(value.shape)) {}

const Tensor& Var::value() const {
  if (!tape_) throw std::logic_error("value() on an empty Var");
  return tape_->value(id_);
}

Tensor Var::grad() const {
  if (!tape_) throw std::logic_error("grad() on an empty Var");
  if (const Tensor* g = tape_->grad_if_any(id_)) return *g;
  return Tensor::zeros(value().shape);
}

Var Tape::record(Tensor value, bool requires_grad, BackwardFn fn, const char* op) {
  if (!value.all_finite()) throw NumericError(std::string("non-finite output from ") + op);
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor t) { return record(std::move(t), false, nullptr, "constant"); }

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
  const bool trainable = frozen_.count(&p) == 0;
  Var v = record(p.value, trainable, nullptr, "param");
  if (trainable) nodes_[v.id_].param = &p;
  param_nodes_.emplace(&p, v.id_);
  return v;
}

void Tape::freeze(std::span<Parameter* const> params) {
  for (Parameter* p : params) {
    if (param_nodes_.count(p)) throw std::logic_error("freeze() after parameter " + p->name + " entered the tape");
    frozen_.insert(p);
  }
}

const Tensor* Tape::grad_if_any(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.has_grad ? &n.grad : nullptr;
}

Tensor& Tape::grad_ref(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor::zeros(n.value.shape);
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(Var loss) {
  if (backward_done_) throw std::logic_error("backward called twice on one tape");
  if (loss.tape_ != this) throw std::logic_error("loss was not recorded on this tape");
  if (nodes_[loss.id_].value.size() != 1)
    throw ShapeError("backward: loss must be scalar, got " + nodes_[loss.id_].value.shape.str());
  backward_done_ = true;
  grad_ref(loss.id_).fill(1.0);
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.has_grad) continue;
    if (n.backward) n.backward(*this, i);
  }
  for (Node& n : nodes_) {
    if (!n.param || !n.has_grad) continue;
    std::vector<double>& dst = n.param->grad.values;
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += n.grad.values[k];
  }
}

namespace {

Tape& same_tape(Var a, Var b, const char* op) {
  if (!a.valid() || a.tape() != b.tape()) throw std::logic_error(std::string(op) + ": operands on different tapes");
  return *a.tape();
}

[[noreturn]] void shape_fail(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.str() + " and " + b.str());
}

bool needs(Tape& t, Var v) { return t.requires_grad(v.id()); }

template <typename Fwd, typename Bwd>
Var unary(Var a, const char* op, Fwd fwd, Bwd bwd) {
  Tape& t = *a.tape();
  const Tensor& x = a.value();
  Tensor y(x.shape, std::vector<double>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  const std::size_t ia = a.id();
  return t.record(std::move(y), needs(t, a),
                  [ia, bwd](Tape& tp, std::size_t self) {
                    const Tensor& g = *tp.grad_if_any(self);
                    const Tensor& xv = tp.value(ia);
                    const Tensor& yv = tp.value(self);
                    Tensor& ga = tp.grad_ref(ia);
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bwd(xv[i], yv[i]);
                  },
                  op);
}

}  // namespace

namespace {

// Dot product with four interleaved partial sums, which lets the compiler
// vectorise it.
double dot4(const double* x, const double* y, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4)
    for (std::size_t l = 0; l < 4; ++l) acc[l] += x[j + l] * y[j + l];
  for (; j < n; ++j) acc[0] += x[j] * y[j];
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b, "matmul");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const std::size_t ra = A.rank(), rb = B.rank();
  if (ra == 0 || rb == 0 || (ra == 1 && rb == 1)) shape_fail("matmul", A.shape, B.shape);
  const std::size_t m = ra == 2 ? A.shape[0] : 1;
  const std::size_t k = A.cols();
  const std::size_t kb = B.shape[0];
  const std::size_t n = rb == 2 ? B.shape[1] : 1;
  if (k != kb) shape_fail("matmul", A.shape, B.shape);

  Shape out_shape = (ra == 2 && rb == 2) ? Shape{m, n} : (ra == 1 ? Shape{n} : Shape{m});
  Tensor C = Tensor::zeros(out_shape);
  const double* pa = A.values.data();
  const double* pb = B.values.data();
  double* pc = C.values.data();
  for (std::size_t r = 0; r < m; ++r) {
    double* crow = pc + r * n;
    for (std::size_t i = 0; i < k; ++i) {
      const double av = pa[r * k + i];
      if (av == 0.0) continue;
      const double* brow = pb + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }

  const std::size_t ia = a.id(), ib = b.id();
  const bool ga_needed = needs(t, a), gb_needed = needs(t, b);
  return t.record(std::move(C), ga_needed || gb_needed,
                  [=](Tape& tp, std::size_t self) {
                    const double* g = tp.grad_if_any(self)->values.data();
                    const double* av = tp.value(ia).values.data();
                    const double* bv = tp.value(ib).values.data();
                    if (ga_needed) {
                      double* da = tp.grad_ref(ia).values.data();
                      for (std::size_t r = 0; r < m; ++r)
                        for (std::size_t i = 0; i < k; ++i) {
                          da[r * k + i] += dot4(g + r * n, bv + i * n, n);
                        }
                    }
                    if (gb_needed) {
                      double* db = tp.grad_ref(ib).values.data();
                      for (std::size_t r = 0; r < m; ++r)
                        for (std::size_t i = 0; i < k; ++i) {
                          const double aval = av[r * k + i];
                          if (aval == 0.0) continue;
                          const double* grow = g + r * n;
                          double* drow = db + i * n;
                          for (std::size_t j = 0; j < n; ++j) drow[j] += aval * grow[j];
                        }
                    }
                  },
                  "matmul");
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b, "add");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (!(A.shape == B.shape)) shape_fail("add", A.shape, B.shape);
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] += B[i];
  const std::size_t ia = a.id(), ib = b.id();
  const bool na = needs(t, a), nb = needs(t, b);
  return t.record(std::move(C), na || nb,
                  [=](Tape& tp, std::size_t self) {
                    const Tensor& g = *tp.grad_if_any(self);
                    if (na) {
                      Tensor& d = tp.grad_ref(ia);
                      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
                    }
                    if (nb) {
                      Tensor& d = tp.grad_ref(ib);
                      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
                    }
                  },
                  "add");
}

Var add_row(Var a, Var b) {
  Tape& t = same_tape(a, b, "add_row");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.rank() != 2 || B.rank() != 1 || A.shape[1] != B.shape[0]) shape_fail("add_row", A.shape, B.shape);
  const std::size_t m = A.shape[0], n = A.shape[1];
  Tensor C = A;
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t j = 0; j < n; ++j) C.values[r * n + j] += B[j];
  const std::size_t ia = a.id(), ib = b.id();
  const bool na = needs(t, a), nb = needs(t, b);
  return t.record(std::move(C), na || nb,
                  [=](Tape& tp, std::size_t self) {
                    const Tensor& g = *tp.grad_if_any(self);
                    if (na) {
                      Tensor& d = tp.grad_ref(ia);
                      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
                    }
                    if (nb) {
                      Tensor& d = tp.grad_ref(ib);
                      for (std::size_t r = 0; r < m; ++r)
                        for (std::size_t j = 0; j < n; ++j) d[j] += g.values[r * n + j];
                    }
                  },
                  "add_row");
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b, "sub");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (!(A.shape == B.shape)) shape_fail("sub", A.shape, B.shape);
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] -= B[i];
  const std::size_t ia = a.id(), ib = b.id();
  const bool na = needs(t, a), nb = needs(t, b);
  return t.record(std::move(C), na || nb,
                  [=](Tape& tp, std::size_t self) {
                    const Tensor& g = *tp.grad_if_any(self);
                    if (na) {
                      Tensor& d = tp.grad_ref(ia);
                      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
                    }
                    if (nb) {
                      Tensor& d = tp.grad_ref(ib);
                      for (std::size_t i = 0; i < g.size(); ++i) d[i] -= g[i];
                    }
                  },
                  "sub");
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b, "mul");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (!(A.shape == B.shape)) shape_fail("mul", A.shape, B.shape);
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] *= B[i];
  const std::size_t ia = a.id(), ib = b.id();
  const bool na = needs(t, a), nb = needs(t, b);
  return t.record(std::move(C), na || nb,
                  [=](Tape& tp, std::size_t self) {
                    const Tensor& g = *tp.grad_if_any(self);
                    const Tensor& av = tp.value(ia);
                    const Tensor& bv = tp.value(ib);
                    if (na) {
                      Tensor& d = tp.grad_ref(ia);
                      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * bv[i];
                    }
                    if (nb) {
                      Tensor& d = tp.grad_ref(ib);
                      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * av[i];
                    }
                  },
                  "mul");
}

Var scale(Var a, double s) {
  return unary(a, "scale", [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var one_minus(Var a) {
  return unary(a, "one_minus", [](double x) { return 1.0 - x; }, [](double, double) { return -1.0; });
}

Var tanh(Var a) {
  return unary(a, "tanh", [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(
      a, "sigmoid",
      [](double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var log_sigmoid(Var a) {
  return unary(
      a, "log_sigmoid", [](double x) { return std::min(x, 0.0) - std::log1p(std::exp(-std::abs(x))); },
      [](double x, double) {
        // d/dx log σ(x) = σ(-x)
        return x >= 0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
      });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  Tape& t = *parts[0].tape();
  std::vector<double> out;
  std::vector<std::size_t> ids, offsets;
  bool any = false;
  for (const Var& p : parts) {
    if (p.tape() != &t) throw std::logic_error("concat: operands on different tapes");
    if (p.value().rank() != 1) throw ShapeError("concat: expected rank-1 input, got " + p.value().shape.str());
    ids.push_back(p.id());
    offsets.push_back(out.size());
    out.insert(out.end(), p.value().values.begin(), p.value().values.end());
    any = any || needs(t, p);
  }
  return t.record(Tensor::vector(std::move(out)), any,
                  [ids, offsets](Tape& tp, std::size_t self) {
                    const Tensor& g = *tp.grad_if_any(self);
                    for (std::size_t k = 0; k < ids.size(); ++k) {
                      if (!tp.requires_grad(ids[k])) continue;
                      Tensor& d = tp.grad_ref(ids[k]);
                      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[offsets[k] + i];
                    }
                  },
                  "concat");
}

Var slice(Var a, std::size_t begin, std::size_t len) {
  Tape& t = *a.tape();
  const Tensor& A = a.value();
  if (A.rank() != 1 || begin + len > A.size())
    throw ShapeError("slice: range [" + std::to_string(begin) + "," + std::to_string(begin + len) + ") out of " +
                     A.shape.str());
  Tensor out = Tensor::vector(std::vector<double>(A.values.begin() + begin, A.values.begin() + begin + len));
  const std::size_t ia = a.id();
  return t.record(std::move(out), needs(t, a),
                  [ia, begin](Tape& tp, std::size_t self) {
                    const Tensor& g = *tp.grad_if_any(self);
                    Tensor& d = tp.grad_ref(ia);
                    for (std::size_t i = 0; i < g.size(); ++i) d[begin + i] += g[i];
                  },
                  "slice");
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no inputs");
  Tape& t = *rows[0].tape();
  const std::size_t n = rows[0].value().size();
  std::vector<double> out;
  out.reserve(rows.size() * n);
  std::vector<std::size_t> ids;
  bool any = false;
  for (const Var& r : rows) {
    if (r.tape() != &t) throw std::logic_error("stack_rows: operands on different tapes");
    if (r.value().rank() != 1 || r.value().size() != n) shape_fail("stack_rows", rows[0].shape(), r.shape());
    out.insert(out.end(), r.value().values.begin(), r.value().values.end());
    ids.push_back(r.id());
    any = any || needs(t, r);
  }
  return t.record(Tensor::matrix(rows.size(), n, std::move(out)), any,
                  [ids, n](Tape& tp, std::size_t self) {
                    const Tensor& g = *tp.grad_if_any(self);
                    for (std::size_t k = 0; k < ids.size(); ++k) {
                      if (!tp.requires_grad(ids[k])) continue;
                      Tensor& d = tp.grad_ref(ids[k]);
                      for (std::size_t i = 0; i < n; ++i) d[i] += g[k * n + i];
                    }
                  },
                  "stack_rows");
}

Var gather_row(Var table, std::size_t row) {
  Tape& t = *table.tape();
  const Tensor& T = table.value();
  if (T.rank() != 2 || row >= T.shape[0])
    throw ShapeError("gather_row: row " + std::to_string(row) + " out of table " + T.shape.str());
  const std::size_t n = T.shape[1];
  Tensor out = Tensor::vector(std::vector<double>(T.values.begin() + row * n, T.values.begin() + (row + 1) * n));
  const std::size_t it = table.id();
  return t.record(std::move(out), needs(t, table),
                  [it, row, n](Tape& tp, std::size_t self) {
                    const Tensor& g = *tp.grad_if_any(self);
                    Tensor& d = tp.grad_ref(it);
                    for (std::size_t i = 0; i < n; ++i) d.values[row * n + i] += g[i];
                  },
                  "gather_row");
}

Var softmax(Var a) {
  Tape& t = *a.tape();
  const Tensor& A = a.value();
  if (A.rank() != 1 || A.size() == 0) throw ShapeError("softmax: expected non-empty rank-1 input, got " + A.shape.str());
  const double mx = *std::max_element(A.values.begin(), A.values.end());
  Tensor y = A;
  double z = 0.0;
  for (double& v : y.values) z += (v = std::exp(v - mx));
  for (double& v : y.values) v /= z;
  const std::size_t ia = a.id();
  return t.record(std::move(y), needs(t, a),
                  [ia](Tape& tp, std::size_t self) {
                    const Tensor& g = *tp.grad_if_any(self);
                    const Tensor& yv = tp.value(self);
                    double s = 0.0;
                    for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * yv[i];
                    Tensor& d = tp.grad_ref(ia);
                    for (std::size_t i = 0; i < g.size(); ++i) d[i] += yv[i] * (g[i] - s);
                  },
                  "softmax");
}

Var dot(Var a, Var b) {
  Tape& t = same_tape(a, b, "dot");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.rank() != 1 || !(A.shape == B.shape)) shape_fail("dot", A.shape, B.shape);
  double s = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) s += A[i] * B[i];
  const std::size_t ia = a.id(), ib = b.id();
  const bool na = needs(t, a), nb = needs(t, b);
  return t.record(Tensor::scalar(s), na || nb,
                  [=](Tape& tp, std::size_t self) {
                    const double g = tp.grad_if_any(self)->values[0];
                    const Tensor& av = tp.value(ia);
                    const Tensor& bv = tp.value(ib);
                    if (na) {
                      Tensor& d = tp.grad_ref(ia);
                      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g * bv[i];
                    }
                    if (nb) {
                      Tensor& d = tp.grad_ref(ib);
                      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g * av[i];
                    }
                  },
                  "dot");
}

Var sum(Var a) {
  Tape& t = *a.tape();
  double s = 0.0;
  for (double v : a.value().values) s += v;
  const std::size_t ia = a.id();
  return t.record(Tensor::scalar(s), needs(t, a),
                  [ia](Tape& tp, std::size_t self) {
                    const double g = tp.grad_if_any(self)->values[0];
                    for (double& d : tp.grad_ref(ia).values) d += g;
                  },
                  "sum");
}

Var add_scalars(std::span<const Var> scalars) {
  if (scalars.empty()) throw ShapeError("add_scalars: no inputs");
  Tape& t = *scalars[0].tape();
  double s = 0.0;
  std::vector<std::size_t> ids;
  bool any = false;
  for (const Var& v : scalars) {
    if (v.tape() != &t) throw std::logic_error("add_scalars: operands on different tapes");
    if (v.value().size() != 1) throw ShapeError("add_scalars: non-scalar input " + v.value().shape.str());
    s += v.item();
    ids.push_back(v.id());
    any = any || needs(t, v);
  }
  return t.record(Tensor::scalar(s), any,
                  [ids](Tape& tp, std::size_t self) {
                    const double g = tp.grad_if_any(self)->values[0];
                    for (std::size_t id : ids)
                      if (tp.requires_grad(id)) tp.grad_ref(id).values[0] += g;
                  },
                  "add_scalars");
}

Var softmax_xent(Var logits, std::size_t target, std::span<const std::uint8_t> mask) {
  Tape& t = *logits.tape();
  const Tensor& L = logits.value();
  if (L.rank() != 1) throw ShapeError("softmax_xent: expected rank-1 logits, got " + L.shape.str());
  const std::size_t V = L.size();
  if (!mask.empty() && mask.size() != V)
    throw ShapeError("softmax_xent: mask of size " + std::to_string(mask.size()) + " for logits " + L.shape.str());
  if (target >= V) throw ShapeError("softmax_xent: target " + std::to_string(target) + " out of " + L.shape.str());
  auto allowed = [&](std::size_t i) { return mask.empty() || mask[i] != 0; };
  if (!allowed(target)) throw std::invalid_argument("softmax_xent: target token " + std::to_string(target) + " is masked");

  double mx = -INFINITY;
  for (std::size_t i = 0; i < V; ++i)
    if (allowed(i)) mx = std::max(mx, L[i]);
  std::vector<double> prob(V, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < V; ++i)
    if (allowed(i)) z += (prob[i] = std::exp(L[i] - mx));
  for (double& p : prob) p /= z;
  const double loss = -(L[target] - mx - std::log(z));

  const std::size_t il = logits.id();
  return t.record(Tensor::scalar(loss), needs(t, logits),
                  [il, target, prob = std::move(prob)](Tape& tp, std::size_t self) {
                    const double g = tp.grad_if_any(self)->values[0];
                    Tensor& d = tp.grad_ref(il);
                    for (std::size_t i = 0; i < prob.size(); ++i) d[i] += g * (prob[i] - (i == target ? 1.0 : 0.0));
                  },
                  "softmax_xent");
}

Var dropout(Var a, double p, Rng& rng) {
  Tape& t = *a.tape();
  if (!t.training() || p <= 0.0) return a;
  if (p >= 1.0) throw std::invalid_argument("dropout: p must be < 1");
  const Tensor& A = a.value();
  const double keep = 1.0 - p;
  std::vector<double> m(A.size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : m) v = u(rng) < keep ? 1.0 / keep : 0.0;
  Tensor y = A;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= m[i];
  const std::size_t ia = a.id();
  return t.record(std::move(y), needs(t, a),
                  [ia, m = std::move(m)](Tape& tp, std::size_t self) {
                    const Tensor& g = *tp.grad_if_any(self);
                    Tensor& d = tp.grad_ref(ia);
                    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * m[i];
                  },
                  "dropout");
}

}  // namespace amwp::core
