#pragma once

#include <cstdint>
#include <vector>

#include "amwp/core/graph.hpp"

namespace amwp::core {

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

/// Decoupled-weight-decay Adam. Holds first/second moments per parameter.
class AdamW {
 public:
  explicit AdamW(std::vector<Parameter*> params, AdamWOptions opts = {});

  void zero_grad();
  /// Throws NumericError if any gradient is non-finite; nothing is updated then.
  void step(double lr);

  std::int64_t step_count() const { return steps_; }
  const std::vector<Parameter*>& params() const { return params_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  AdamWOptions opts_;
  std::int64_t steps_ = 0;
};

}  // namespace amwp::core
