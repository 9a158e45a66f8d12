#include "e2e/dsp/fft.hpp"

#include <unsupported/Eigen/FFT>

namespace e2e::dsp {
namespace {

Eigen::FFT<double>& engine() {
  // Plans are cached per instance; one per thread keeps runs independent.
  thread_local Eigen::FFT<double> instance;
  return instance;
}

}  // namespace

ComplexVector fft(const ComplexVector& x) {
  ComplexVector out(x.size());
  engine().fwd(out, x);
  return out;
}

ComplexVector ifft(const ComplexVector& spectrum) {
  ComplexVector out(spectrum.size());
  engine().inv(out, spectrum);
  return out;
}

RealVector fft_frequencies(Eigen::Index n, double sample_rate) {
  RealVector f(n);
  const double df = sample_rate / static_cast<double>(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index signed_k = (2 * k < n) ? k : k - n;
    f[k] = static_cast<double>(signed_k) * df;
  }
  return f;
}

ComplexVector apply_response(const ComplexVector& x, const ComplexVector& response) {
  if (response.size() != x.size()) {
    throw ContractError("frequency response length does not match signal length");
  }
  ComplexVector spectrum = fft(x);
  spectrum.array() *= response.array();
  return ifft(spectrum);
}

RealVector apply_response(const RealVector& x, const ComplexVector& response) {
  const ComplexVector y = apply_response(ComplexVector(x.cast<Complex>()), response);
  return y.real();
}

}  // namespace e2e::dsp
