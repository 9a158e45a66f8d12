#pragma once

#include <functional>

#include "e2e/types.hpp"

namespace e2e::ad {

/// A parameter-to-scalar map. When `grad` is non-null the map also writes its
/// reverse-mode gradient there.
using ScalarFunction = std::function<double(const RealVector& point, RealVector* grad)>;

struct GradCheck {
  double max_rel_error = 0.0;
  Eigen::Index worst_index = -1;
  RealVector analytic;
  RealVector numeric;
};

/// Compares the reverse-mode gradient of f at `point` with central
/// differences: max_i |g_ad - g_fd| / (|g_fd| + 1e-12).
GradCheck finite_diff_check(const ScalarFunction& f, const RealVector& point, double eps = 1e-5);

}  // namespace e2e::ad
