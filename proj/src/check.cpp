#include "e2e/ad/check.hpp"

#include <cmath>
#include <string>

#include "e2e/ad/tape.hpp"

namespace e2e::ad {

GradCheck finite_diff_check(const ScalarFunction& f, const RealVector& point, double eps) {
  GradCheck out;
  out.analytic = RealVector::Zero(point.size());
  const double f0 = f(point, &out.analytic);
  if (std::isnan(f0)) throw AdjointError("finite_diff_check: function is NaN at the base point");
  out.numeric.resize(point.size());
  RealVector probe = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    probe[i] = point[i] + eps;
    const double up = f(probe, nullptr);
    probe[i] = point[i] - eps;
    const double down = f(probe, nullptr);
    probe[i] = point[i];
    if (std::isnan(up) || std::isnan(down)) {
      throw AdjointError("finite_diff_check: NaN at coordinate " + std::to_string(i));
    }
    out.numeric[i] = (up - down) / (2.0 * eps);
    const double rel = std::abs(out.analytic[i] - out.numeric[i]) / (std::abs(out.numeric[i]) + 1e-12);
    if (rel > out.max_rel_error || out.worst_index < 0) {
      out.max_rel_error = rel;
      out.worst_index = i;
    }
  }
  return out;
}

}  // namespace e2e::ad
