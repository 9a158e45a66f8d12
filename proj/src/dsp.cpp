#include <cmath>
#include <numbers>

#include "e2e/dsp/analog.hpp"
#include "e2e/dsp/fft.hpp"
#include "e2e/dsp/fir.hpp"
#include "e2e/dsp/pulse.hpp"

namespace e2e {

FilterTaps::FilterTaps(RealVector c, int samples_per_symbol) : coeffs(std::move(c)), sps(samples_per_symbol) {
  if (coeffs.size() % 2 == 0) throw ContractError("FIR tap count must be odd");
  if (sps < 1) throw ContractError("samples per symbol must be >= 1");
}

FilterTaps FilterTaps::impulse(Eigen::Index n_taps, int samples_per_symbol) {
  RealVector c = RealVector::Zero(n_taps);
  c[(n_taps - 1) / 2] = 1.0;
  return {std::move(c), samples_per_symbol};
}

}  // namespace e2e

namespace e2e::dsp {

RealVector fir_same_adjoint_input(const RealVector& grad_out, const RealVector& h) {
  const Eigen::Index n = grad_out.size();
  const Eigen::Index taps = h.size();
  const Eigen::Index c = (taps - 1) / 2;
  RealVector padded = RealVector::Zero(n + taps - 1);
  padded.segment(c, n) = grad_out;
  RealVector gx = RealVector::Zero(n);
  for (Eigen::Index k = 0; k < taps; ++k) gx += h[k] * padded.segment(k, n);
  return gx;
}

RealVector fir_same_adjoint_taps(const RealVector& grad_out, const RealVector& x, Eigen::Index n_taps) {
  const Eigen::Index n = x.size();
  const Eigen::Index c = (n_taps - 1) / 2;
  RealVector padded = RealVector::Zero(n + n_taps - 1);
  padded.segment(c, n) = x;
  RealVector gh(n_taps);
  for (Eigen::Index k = 0; k < n_taps; ++k) gh[k] = grad_out.dot(padded.segment(n_taps - 1 - k, n));
  return gh;
}

RealSignal fir_convolve(const RealSignal& signal, const FilterTaps& taps) {
  require_valid(signal);
  return {fir_same(signal.samples, taps.coeffs), signal.sample_rate};
}

RealSignal upsample(const RealVector& symbols, int sps, double symbol_rate) {
  if (sps < 1) throw ContractError("upsampling factor must be >= 1");
  RealVector out = RealVector::Zero(symbols.size() * sps);
  for (Eigen::Index k = 0; k < symbols.size(); ++k) out[k * sps] = symbols[k];
  return {std::move(out), symbol_rate * sps};
}

RealVector downsample(const RealSignal& signal, int factor, int offset) {
  return downsample(signal.samples, factor, offset);
}

// --- analog prototypes -------------------------------------------------------

namespace {

RealVector reverse_bessel_coefficients(int order) {
  // a_k = (2n - k)! / (2^(n-k) k! (n-k)!)
  RealVector a(order + 1);
  for (int k = 0; k <= order; ++k) {
    const double log_a = std::lgamma(2.0 * order - k + 1) - (order - k) * std::log(2.0) - std::lgamma(k + 1.0) -
                         std::lgamma(order - k + 1.0);
    a[k] = std::round(std::exp(log_a));
  }
  return a;
}

Complex eval_poly(const RealVector& a, Complex s) {
  Complex acc = 0.0;
  for (Eigen::Index k = a.size() - 1; k >= 0; --k) acc = acc * s + a[k];
  return acc;
}

}  // namespace

BesselPrototype::BesselPrototype(int order, double f3db_hz) : order_(order), f3db_(f3db_hz) {
  if (order < 1) throw ContractError("Bessel order must be >= 1");
  if (!(f3db_hz > 0.0)) throw ContractError("Bessel cutoff must be positive");
  poly_ = reverse_bessel_coefficients(order);
  // |H(j w)|^2 decreases monotonically; bisect for the half-power point.
  const auto mag2 = [&](double w) { return std::norm(poly_[0] / eval_poly(poly_, Complex(0.0, w))); };
  double lo = 0.0;
  double hi = 1.0;
  while (mag2(hi) > 0.5) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mag2(mid) > 0.5 ? lo : hi) = mid;
  }
  scale_ = 0.5 * (lo + hi) / f3db_hz;
}

Complex BesselPrototype::response(double f_hz) const {
  return poly_[0] / eval_poly(poly_, Complex(0.0, scale_ * f_hz));
}

ComplexVector bessel_grid(int order, double f3db_hz, Eigen::Index n, double sample_rate) {
  if (!(f3db_hz < 0.5 * sample_rate)) {
    throw ConfigError("Bessel cutoff must lie below the Nyquist frequency");
  }
  const BesselPrototype proto(order, f3db_hz);
  const RealVector f = fft_frequencies(n, sample_rate);
  ComplexVector h(n);
  for (Eigen::Index k = 0; k < n; ++k) h[k] = proto.response(f[k]);
  if (n % 2 == 0) h[n / 2] = h[n / 2].real();
  return h;
}

double bessel_group_delay(int order, double f3db_hz) {
  const BesselPrototype proto(order, f3db_hz);
  constexpr int kGrid = 2001;
  double unwrapped = 0.0;
  Complex prev = proto.response(0.0);
  for (int i = 1; i < kGrid; ++i) {
    const Complex cur = proto.response(f3db_hz * i / (kGrid - 1));
    unwrapped += std::arg(cur / prev);
    prev = cur;
  }
  // Averaging finite-difference slopes over a uniform grid telescopes.
  return -unwrapped / (2.0 * std::numbers::pi * f3db_hz);
}

double super_gaussian_response(double f_hz, double center_hz, double f3db_hz, int order) {
  if (order < 1) throw ContractError("super-Gaussian order must be >= 1");
  const double x = (f_hz - center_hz) / f3db_hz;
  return std::exp(-0.5 * std::numbers::ln2 * std::pow(x * x, order));
}

RealVector super_gaussian_grid(double center_hz, double f3db_hz, int order, Eigen::Index n, double sample_rate) {
  const RealVector f = fft_frequencies(n, sample_rate);
  return f.unaryExpr([&](double fk) { return super_gaussian_response(fk, center_hz, f3db_hz, order); });
}

RealSignal bessel_lpf(const RealSignal& signal, int order, double f3db_hz) {
  require_valid(signal);
  const ComplexVector h = bessel_grid(order, f3db_hz, signal.size(), signal.sample_rate);
  return {apply_response(signal.samples, h), signal.sample_rate};
}

ComplexSignal super_gaussian_bpf(const ComplexSignal& signal, double center_hz, double f3db_hz, int order) {
  require_valid(signal);
  const RealVector h = super_gaussian_grid(center_hz, f3db_hz, order, signal.size(), signal.sample_rate);
  return {apply_response(signal.samples, ComplexVector(h.cast<Complex>())), signal.sample_rate};
}

RealSignal super_gaussian_bpf(const RealSignal& signal, double center_hz, double f3db_hz, int order) {
  if (center_hz != 0.0) throw ContractError("a real signal can only be filtered around 0 Hz");
  require_valid(signal);
  RealVector h = super_gaussian_grid(0.0, f3db_hz, order, signal.size(), signal.sample_rate);
  return {apply_response(signal.samples, ComplexVector(h.cast<Complex>())), signal.sample_rate};
}

// --- pulses ------------------------------------------------------------------

FilterTaps rrc_taps(int sps, int span, double rolloff) {
  if (sps < 1) throw ContractError("rrc: sps must be >= 1");
  if (span < 2) throw ContractError("rrc: span must be >= 2 symbols");
  if (rolloff < 0.0 || rolloff > 1.0) throw ContractError("rrc: rolloff must lie in [0, 1]");
  const Eigen::Index n = static_cast<Eigen::Index>(span) * sps + 1;
  if (n % 2 == 0) throw ContractError("rrc: span * sps + 1 is even; adjust the span");
  const double pi = std::numbers::pi;
  const double beta = rolloff;
  const Eigen::Index c = (n - 1) / 2;
  RealVector h(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i - c) / sps;
    if (i == c) {
      h[i] = 1.0 - beta + 4.0 * beta / pi;
    } else if (beta > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-12) {
      h[i] = beta / std::numbers::sqrt2 *
             ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * beta)) + (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * beta)));
    } else {
      const double num = std::sin(pi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(pi * t * (1.0 + beta));
      const double den = pi * t * (1.0 - 16.0 * beta * beta * t * t);
      h[i] = num / den;
    }
  }
  h /= h.norm();
  return {std::move(h), sps};
}

FilterTaps rrc_init(int sps, Eigen::Index n_taps, double rolloff, int span) {
  if (n_taps < 1 || n_taps % 2 == 0) throw ContractError("rrc_init: tap count must be odd and positive");
  int s = span;
  while (static_cast<Eigen::Index>(s) * sps + 1 < n_taps || (static_cast<Eigen::Index>(s) * sps) % 2 != 0) ++s;
  const FilterTaps full = rrc_taps(sps, s, rolloff);
  RealVector cut = full.coeffs.segment(full.center() - (n_taps - 1) / 2, n_taps);
  cut /= cut.norm();
  return {std::move(cut), sps};
}

}  // namespace e2e::dsp
