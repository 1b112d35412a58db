#pragma once

#include <functional>
#include <span>

#include "amwp/core/graph.hpp"

namespace amwp::core {

/// Builds a scalar loss on the given (evaluation-mode) tape.
using LossBuilder = std::function<Var(Tape&)>;

/// Max over every coordinate of every parameter of
/// |analytic - central difference| / max(1, |analytic|).
/// f must be deterministic. Parameter values are restored on return;
/// their grad buffers are left holding the analytic gradient.
double finite_diff_check(const LossBuilder& f, std::span<Parameter* const> params, double eps = 1e-5);

}  // namespace amwp::core
