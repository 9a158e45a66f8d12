#pragma once

#include <functional>

#include "e2e/ad/tape.hpp"

namespace e2e::ad {

// Differentiable building blocks. Each op records its forward value and an
// adjoint on the tape; linear ops apply their (conjugate) transpose.

Real add(Tape& t, Real a, Real b);
Cplx add(Tape& t, Cplx a, Cplx b);
Real add_constant(Tape& t, Real x, const RealVector& c);
Cplx add_constant(Tape& t, Cplx x, const ComplexVector& c);
Real affine(Tape& t, Real x, double scale, double offset = 0.0);

/// x * s for a one-element s.
Real mul_scalar(Tape& t, Real x, Real s);
/// x + b for a one-element b.
Real add_scalar(Tape& t, Real x, Real b);

/// Subgradient 1 on [lo, hi] (boundaries included) and 0 outside.
Real clip(Tape& t, Real x, double lo, double hi);

Real fir(Tape& t, Real x, Real taps);
Real downsample(Tape& t, Real x, int factor, int offset);
Real slice(Tape& t, Real x, Eigen::Index start, Eigen::Index length);

/// Linear frequency-domain filter on the FFT grid. The real overload
/// requires a Hermitian response.
Real filter(Tape& t, Real x, const ComplexVector& response);
Cplx filter(Tape& t, Cplx x, const ComplexVector& response);

/// Elementwise product with a fixed complex waveform (e.g. a carrier).
Cplx modulate(Tape& t, Cplx x, const ComplexVector& waveform);
Cplx to_complex(Tape& t, Real x);
Real real_part(Tape& t, Cplx x);
/// scale * |x|^2.
Real abs2(Tape& t, Cplx x, double scale = 1.0);

Real remove_mean(Tape& t, Real x);
/// x * sqrt(target / mean(x^2)), differentiated exactly through the scale.
Real power_normalize(Tape& t, Real x, double target_power);

Real dot(Tape& t, Real a, Real b);
Real mse(Tape& t, Real estimate, const RealVector& target);

/// Applies a non-differentiable map (quantizers, evaluation-only blocks).
/// The result is a constant on the tape.
Real untracked(Tape& t, Real x, const std::function<RealVector(const RealVector&)>& fn);
Cplx untracked(Tape& t, Cplx x, const std::function<ComplexVector(const ComplexVector&)>& fn);

}  // namespace e2e::ad
