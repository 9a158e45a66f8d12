#pragma once

#include "e2e/ad/tape.hpp"
#include "e2e/types.hpp"

namespace e2e::eq {

/// Oversampled linear feed-forward equalizer (same-mode FIR).
RealSignal ffe_apply(const RealSignal& signal, const FilterTaps& taps);

/// n1 + n2 (n2 + 1) / 2.
Eigen::Index param_count(Eigen::Index n1, Eigen::Index n2);

/// Second-order Volterra kernel. Tap k of either kernel reads x[n + c - k]
/// with c = (n - 1) / 2, as in fir_same. The symmetric quadratic kernel is
/// stored once, row-major over i <= j.
struct VolterraKernel {
  RealVector k1;
  RealVector k2;
  Eigen::Index n2 = 0;

  VolterraKernel() = default;
  VolterraKernel(RealVector first, RealVector second, Eigen::Index second_lags);

  Eigen::Index n1() const { return k1.size(); }
  Eigen::Index size() const { return k1.size() + k2.size(); }

  /// Packed position of (i, j), i <= j.
  static Eigen::Index packed_index(Eigen::Index i, Eigen::Index j, Eigen::Index n2);
  double& at(Eigen::Index i, Eigen::Index j) { return k2[packed_index(i, j, n2)]; }

  /// k1 = unit impulse at its center, k2 = 0.
  static VolterraKernel identity(Eigen::Index n1, Eigen::Index n2);
};

/// y[n] = sum_i k1[i] x[n+c1-i] + sum_{i<=j} k2[i,j] x[n+c2-i] x[n+c2-j],
/// zero padding at the edges.
RealVector volterra2_apply(const RealVector& x, const VolterraKernel& kernel);

/// Tape version over packed k1 and k2 handles.
ad::Real volterra2(ad::Tape& t, ad::Real x, ad::Real k1, ad::Real k2, Eigen::Index n2);

}  // namespace e2e::eq
