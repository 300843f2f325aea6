#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dage/geometry.hpp"

namespace dage {

struct OperatorCheck {
  std::string op;
  bool applicable = true;  // false for box complement
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::size_t unresolved = 0;
  bool passed(double tol = 1e-4) const { return !applicable || (checked > 0 && max_rel_error < tol); }
};

const std::vector<std::string>& operator_names();

// Finite-difference check of every geometry operator at `points` random
// inputs, w.r.t. the inputs and all operator network weights.
std::vector<OperatorCheck> check_operators(Geometry g, std::uint64_t seed, std::size_t points = 20,
                                           std::size_t dim = 3);

}  // namespace dage
