#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace e2e {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using RealVector = Vector<double>;
using ComplexVector = Vector<Complex>;

/// Raised when an argument violates an operation's precondition.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for inconsistent link or experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sampled waveform with its sample rate in Hz.
template <typename Scalar>
struct SampledSignal {
  Vector<Scalar> samples;
  double sample_rate = 1.0;

  Eigen::Index size() const { return samples.size(); }
};

using RealSignal = SampledSignal<double>;
using ComplexSignal = SampledSignal<Complex>;

template <typename Scalar>
void require_valid(const SampledSignal<Scalar>& signal) {
  if (!(signal.sample_rate > 0.0)) {
    throw ContractError("signal sample rate must be positive");
  }
  if (signal.samples.size() < 1) {
    throw ContractError("signal must hold at least one sample");
  }
}

/// Real FIR coefficients with the oversampling factor they operate at.
/// The tap count is odd so that the filter has a center tap.
struct FilterTaps {
  RealVector coeffs;
  int sps = 1;

  FilterTaps() = default;
  FilterTaps(RealVector c, int samples_per_symbol);

  Eigen::Index size() const { return coeffs.size(); }
  Eigen::Index center() const { return (coeffs.size() - 1) / 2; }

  static FilterTaps impulse(Eigen::Index n_taps, int samples_per_symbol);
};

}  // namespace e2e
