#include "amwp/core/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace amwp::core {

namespace {

double evaluate(const LossBuilder& f) {
  Tape t(false);
  const double v = f(t).item();
  if (!std::isfinite(v)) throw NumericError("finite_diff_check: non-finite loss");
  return v;
}

}  // namespace

double finite_diff_check(const LossBuilder& f, std::span<Parameter* const> params, double eps) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape t(false);
    Var loss = f(t);
    if (!std::isfinite(loss.item())) throw NumericError("finite_diff_check: non-finite loss");
    t.backward(loss);
  }

  double worst = 0.0;
  for (Parameter* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double orig = p->value[i];
      p->value[i] = orig + eps;
      const double up = evaluate(f);
      p->value[i] = orig - eps;
      const double down = evaluate(f);
      p->value[i] = orig;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad[i];
      worst = std::max(worst, std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic)));
    }
  }
  return worst;
}

}  // namespace amwp::core
