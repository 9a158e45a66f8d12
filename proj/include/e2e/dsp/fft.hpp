#pragma once

#include "e2e/types.hpp"

namespace e2e::dsp {

// Unnormalized forward transform; the inverse carries the 1/n factor.
ComplexVector fft(const ComplexVector& x);
ComplexVector ifft(const ComplexVector& spectrum);

/// Bin frequencies in Hz in standard FFT order (DC, positive, then negative).
/// For even n the Nyquist bin is reported as -fs/2.
RealVector fft_frequencies(Eigen::Index n, double sample_rate);

/// Applies a frequency response given on the FFT grid: ifft(H .* fft(x)).
ComplexVector apply_response(const ComplexVector& x, const ComplexVector& response);

/// Real-input variant. The response must be Hermitian on the grid; the
/// (rounding-level) imaginary residue of the inverse transform is dropped.
RealVector apply_response(const RealVector& x, const ComplexVector& response);

}  // namespace e2e::dsp
