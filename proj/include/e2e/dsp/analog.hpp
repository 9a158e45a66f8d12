#pragma once

#include "e2e/types.hpp"

namespace e2e::dsp {

/// Analog Bessel low-pass prototype H(s) = theta_n(0) / theta_n(s / w0), with
/// theta_n the reverse Bessel polynomial and w0 chosen so that
/// |H(j 2 pi f3db)|^2 = 1/2.
class BesselPrototype {
 public:
  BesselPrototype(int order, double f3db_hz);

  Complex response(double f_hz) const;
  double magnitude_squared(double f_hz) const { return std::norm(response(f_hz)); }

  int order() const { return order_; }
  double f3db() const { return f3db_; }

 private:
  int order_;
  double f3db_;
  double scale_;  // normalized 3 dB frequency / f3db
  RealVector poly_;
};

/// Bessel response sampled on the FFT grid of an n-point signal. The Nyquist
/// bin of an even grid keeps only its real part so the grid response is
/// Hermitian and real signals stay real.
ComplexVector bessel_grid(int order, double f3db_hz, Eigen::Index n, double sample_rate);

/// Mean of -d(phase)/d(omega) over [0, f3db], from the unwrapped phase.
double bessel_group_delay(int order, double f3db_hz);

/// exp(-ln2/2 * ((f - center) / f3db)^(2 order)): zero phase, unit gain at
/// the center, half power at center +- f3db.
double super_gaussian_response(double f_hz, double center_hz, double f3db_hz, int order);

RealVector super_gaussian_grid(double center_hz, double f3db_hz, int order, Eigen::Index n, double sample_rate);

RealSignal bessel_lpf(const RealSignal& signal, int order, double f3db_hz);

ComplexSignal super_gaussian_bpf(const ComplexSignal& signal, double center_hz, double f3db_hz, int order);

/// Real-signal overload; only a zero center keeps the output real.
RealSignal super_gaussian_bpf(const RealSignal& signal, double center_hz, double f3db_hz, int order);

}  // namespace e2e::dsp
