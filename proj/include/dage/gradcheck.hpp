#pragma once

#include <functional>
#include <vector>

#include "dage/autodiff.hpp"

namespace dage {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // coordinates whose ±eps probes straddle a kink
  std::size_t unresolved = 0;  // gradient below the rounding noise of the difference quotient
};

// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

// f builds a scalar on the given tape from the parameters (through
// tape.param). Every coordinate of every parameter is probed with central
// differences.
GradCheckResult grad_check(const std::function<Var(Tape&)>& f, const std::vector<Parameter*>& params,
                           double eps = 1e-5);

// Convenience form over plain input tensors.
GradCheckResult grad_check(const std::function<Var(Tape&, const std::vector<Var>&)>& f,
                           const std::vector<Tensor>& inputs, double eps = 1e-5);

}  // namespace dage
