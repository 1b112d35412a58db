#include "amwp/core/optim.hpp"

#include <cmath>

namespace amwp::core {

AdamW::AdamW(std::vector<Parameter*> params, AdamWOptions opts) : params_(std::move(params)), opts_(opts) {
  for (Parameter* p : params_) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

void AdamW::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

void AdamW::step(double lr) {
  for (Parameter* p : params_)
    if (!p->grad.all_finite()) throw NumericError("non-finite gradient in parameter " + p->name);

  ++steps_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    std::vector<double>& w = params_[k]->value.values;
    const std::vector<double>& g = params_[k]->grad.values;
    std::vector<double>& m = m_[k];
    std::vector<double>& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] -= lr * opts_.weight_decay * w[i];
      m[i] = opts_.beta1 * m[i] + (1.0 - opts_.beta1) * g[i];
      v[i] = opts_.beta2 * v[i] + (1.0 - opts_.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + opts_.eps);
    }
  }
}

}  // namespace amwp::core
