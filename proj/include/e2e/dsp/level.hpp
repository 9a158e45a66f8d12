#pragma once

#include <algorithm>
#include <cmath>

#include "e2e/types.hpp"

namespace e2e::dsp {

/// Clips to [lo, hi] and rounds to the nearest of 2^bits uniformly spaced
/// levels that include both endpoints.
template <typename Derived>
RealVector quantize_uniform(const Eigen::MatrixBase<Derived>& x, int bits, double lo, double hi) {
  if (bits < 1) throw ContractError("quantizer needs at least one bit");
  if (!(lo < hi)) throw ContractError("quantizer range must satisfy lo < hi");
  const double steps = std::ldexp(1.0, bits) - 1.0;
  const double delta = (hi - lo) / steps;
  return x.derived().unaryExpr([=](double v) {
    const double clipped = std::clamp(v, lo, hi);
    return lo + std::round((clipped - lo) / delta) * delta;
  });
}

inline RealSignal quantize_uniform(const RealSignal& signal, int bits, double lo, double hi) {
  return {quantize_uniform(signal.samples, bits, lo, hi), signal.sample_rate};
}

template <typename Scalar>
double mean_power(const Vector<Scalar>& x) {
  return x.squaredNorm() / static_cast<double>(x.size());
}

/// x * sqrt(target / mean(|x|^2)).
template <typename Scalar>
Vector<Scalar> power_normalize(const Vector<Scalar>& x, double target_power) {
  if (x.size() == 0) throw ContractError("cannot normalize an empty signal");
  const double p = mean_power(x);
  if (!(p > 0.0)) throw ContractError("cannot normalize a zero-power signal");
  return x * std::sqrt(target_power / p);
}

template <typename Scalar>
SampledSignal<Scalar> power_normalize(const SampledSignal<Scalar>& signal, double target_power) {
  return {power_normalize(signal.samples, target_power), signal.sample_rate};
}

inline FilterTaps unit_norm_project(const FilterTaps& taps) {
  const double norm = taps.coeffs.norm();
  if (!(norm > 0.0)) throw ContractError("cannot project a zero filter onto the unit sphere");
  return {taps.coeffs / norm, taps.sps};
}

}  // namespace e2e::dsp
