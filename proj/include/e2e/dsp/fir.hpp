#pragma once

#include "e2e/types.hpp"

namespace e2e::dsp {

/// "Same"-mode FIR convolution with zero padding:
///   y[n] = sum_k h[k] x[n + c - k],  c = (N - 1) / 2.
/// The output has the input length and is centered on the middle tap.
template <typename Scalar>
Vector<Scalar> fir_same(const Vector<Scalar>& x, const RealVector& h) {
  if (h.size() < 1) throw ContractError("FIR taps must be non-empty");
  const Eigen::Index n = x.size();
  const Eigen::Index taps = h.size();
  const Eigen::Index c = (taps - 1) / 2;
  Vector<Scalar> padded = Vector<Scalar>::Zero(n + taps - 1);
  padded.segment(c, n) = x;
  Vector<Scalar> y = Vector<Scalar>::Zero(n);
  for (Eigen::Index k = 0; k < taps; ++k) {
    y += h[k] * padded.segment(taps - 1 - k, n);
  }
  return y;
}

/// Adjoint of fir_same with respect to its input signal.
RealVector fir_same_adjoint_input(const RealVector& grad_out, const RealVector& h);

/// Adjoint of fir_same with respect to its taps.
RealVector fir_same_adjoint_taps(const RealVector& grad_out, const RealVector& x, Eigen::Index n_taps);

RealSignal fir_convolve(const RealSignal& signal, const FilterTaps& taps);

/// Zero-insertion upsampling; the result runs at sps * symbol_rate.
RealSignal upsample(const RealVector& symbols, int sps, double symbol_rate);

/// output[k] = samples[k * factor + offset] for k < size / factor; a signal
/// shorter than one factor yields an empty vector.
RealVector downsample(const RealSignal& signal, int factor, int offset);

template <typename Scalar>
Vector<Scalar> downsample(const Vector<Scalar>& x, int factor, int offset) {
  if (factor < 1) throw ContractError("downsampling factor must be >= 1");
  if (offset < 0 || offset >= factor) throw ContractError("downsampling offset must lie in [0, factor)");
  const Eigen::Index n = x.size() / factor;
  Vector<Scalar> out(n);
  for (Eigen::Index k = 0; k < n; ++k) out[k] = x[k * factor + offset];
  return out;
}

}  // namespace e2e::dsp
