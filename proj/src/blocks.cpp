#include "e2e/link/blocks.hpp"

#include <cmath>
#include <numbers>

#include "e2e/ad/ops.hpp"
#include "e2e/dsp/analog.hpp"
#include "e2e/dsp/fft.hpp"
#include "e2e/dsp/level.hpp"

namespace e2e::link {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
}

double awgn_noise_scale(double snr_db, double signal_power, int sps) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return std::sqrt(signal_power * sps / (2.0 * std::pow(10.0, snr_db / 10.0)));
}

double thermal_noise_variance(const PhotodiodeParams& pd, double sample_rate) {
  return 4.0 * pd.boltzmann_j_per_k * pd.temperature_k * sample_rate / (pd.bandwidth_hz * pd.impedance_ohm);
}

double shot_noise_variance(const PhotodiodeParams& pd, double mean_power_w, double sample_rate) {
  return 2.0 * pd.electron_charge_c * (pd.responsivity_a_per_w * mean_power_w + pd.dark_current_a) * sample_rate /
         pd.bandwidth_hz;
}

ComplexVector ideal_mod_field(const RealVector& v, double p_in_w, std::size_t* clamps) {
  if (!(p_in_w > 0.0)) throw ContractError("ideal modulator: laser power must be positive");
  ComplexVector e(v.size());
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) ++count;
    e[i] = std::sqrt(p_in_w * std::max(v[i], 0.0));
  }
  if (clamps != nullptr) *clamps += count;
  return e;
}

namespace {

struct EamSample {
  Complex field;
  Complex d_field_dv;
  bool clamped;
};

EamSample eam_sample(double v, double p_in_w, double chirp, const AbsorptionSpline& spline) {
  const auto a = spline.evaluate(v);
  const double log_p = std::log(p_in_w) - a.value * std::numbers::ln10 / 10.0;  // ln A^2
  const double amp = std::exp(0.5 * log_p);
  const Complex field = std::polar(amp, 0.5 * chirp * log_p);
  // dE/dalpha = E * (-ln10 / 20) * (1 + j chirp)
  const Complex d_alpha = field * (-std::numbers::ln10 / 20.0) * Complex(1.0, chirp);
  return {field, d_alpha * a.slope, a.clamped};
}

}  // namespace

ComplexVector eam_field(const RealVector& v, double p_in_w, double chirp_alpha, const AbsorptionSpline& spline,
                        std::size_t* clamps) {
  if (!(p_in_w > 0.0)) throw ContractError("EAM: laser power must be positive");
  ComplexVector e(v.size());
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const EamSample s = eam_sample(v[i], p_in_w, chirp_alpha, spline);
    e[i] = s.field;
    count += s.clamped ? 1 : 0;
  }
  if (clamps != nullptr) *clamps += count;
  return e;
}

ComplexVector fiber_cd_response(Eigen::Index n, double sample_rate, double length_km, double dispersion_ps_per_nm_km,
                                double wavelength_m, double attenuation_db_per_km) {
  const double d_si = dispersion_ps_per_nm_km * 1e-6;
  const double length_m = length_km * 1e3;
  const double k = d_si * wavelength_m * wavelength_m * std::numbers::pi / kSpeedOfLight * length_m;
  const double gain = std::pow(10.0, -attenuation_db_per_km * length_km / 20.0);
  const RealVector f = dsp::fft_frequencies(n, sample_rate);
  ComplexVector h(n);
  for (Eigen::Index i = 0; i < n; ++i) h[i] = std::polar(gain, k * f[i] * f[i]);
  return h;
}

ComplexSignal fiber_cd(const ComplexSignal& field, double length_km, double dispersion_ps_per_nm_km,
                       double wavelength_m, double attenuation_db_per_km) {
  require_valid(field);
  const ComplexVector h = fiber_cd_response(field.size(), field.sample_rate, length_km, dispersion_ps_per_nm_km,
                                            wavelength_m, attenuation_db_per_km);
  return {dsp::apply_response(field.samples, h), field.sample_rate};
}

ComplexSignal ssfm(const ComplexSignal& field, const SsfmParams& p) {
  require_valid(field);
  if (!(p.step_km > 0.0)) throw ContractError("ssfm: step must be positive");
  const double alpha = p.attenuation_db_per_km * std::numbers::ln10 / 10.0;  // power, 1/km
  ComplexVector e = field.samples;
  double remaining = p.length_km;
  while (remaining > 1e-12) {
    const double h = std::min(p.step_km, remaining);
    // Effective length of a full step seen from its midpoint power.
    const double h_eff = alpha > 0.0 ? 2.0 / alpha * std::sinh(0.5 * alpha * h) : h;
    const ComplexVector half = fiber_cd_response(e.size(), field.sample_rate, 0.5 * h, p.dispersion_ps_per_nm_km,
                                                 p.wavelength_m, p.attenuation_db_per_km);
    e = dsp::apply_response(e, half);
    for (Eigen::Index i = 0; i < e.size(); ++i) e[i] *= std::polar(1.0, -p.gamma_per_w_km * std::norm(e[i]) * h_eff);
    e = dsp::apply_response(e, half);
    remaining -= h;
  }
  return {std::move(e), field.sample_rate};
}

std::vector<double> wdm_offsets(int n_channels, double spacing_hz) {
  std::vector<double> out;
  for (int k = 0; k < n_channels; ++k) out.push_back((k - (n_channels - 1) / 2) * spacing_hz);
  return out;
}

ComplexVector carrier(Eigen::Index n, double sample_rate, double offset_hz) {
  ComplexVector c(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    c[k] = std::polar(1.0, 2.0 * std::numbers::pi * offset_hz * static_cast<double>(k) / sample_rate);
  }
  return c;
}

// --- tape blocks -------------------------------------------------------------

ad::Real dac(ad::Tape& t, ad::Real x, ad::Real g_dac, ad::Real v_b, const LinkConfig& cfg, Mode mode) {
  ad::Real u = ad::clip(t, ad::mul_scalar(t, x, g_dac), -0.5, 0.5);
  if (mode == Mode::eval && cfg.quantize_eval) {
    const int bits = cfg.quant_bits;
    u = ad::untracked(t, u, [bits](const RealVector& s) { return dsp::quantize_uniform(s, bits, -0.5, 0.5); });
  }
  ad::Real v = ad::add_scalar(t, ad::affine(t, u, cfg.v_pp), v_b);
  if (cfg.bandlimit) {
    v = ad::filter(t, v, dsp::bessel_grid(cfg.bessel_order, cfg.dac_f3db_hz, t.value(v).size(), cfg.sample_rate()));
  }
  return v;
}

ad::Cplx ideal_mod(ad::Tape& t, ad::Real v, double p_in_w, LinkDiagnostics* diag) {
  std::size_t clamps = 0;
  ComplexVector e = ideal_mod_field(t.value(v), p_in_w, &clamps);
  if (diag != nullptr) diag->negative_voltage_clamps += clamps;
  RealVector slope(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double amp = e[i].real();
    slope[i] = amp > 0.0 ? p_in_w / (2.0 * amp) : 0.0;
  }
  return t.record("ideal_mod", std::move(e), {v.id}, [v, slope = std::move(slope)](ad::Tape& tp, std::size_t self) {
    tp.accumulate(v.id, RealVector(tp.grad_complex(self).real().cwiseProduct(slope)));
  });
}

ad::Cplx eam_mod(ad::Tape& t, ad::Real v, double p_in_w, double chirp_alpha, const AbsorptionSpline& spline,
                 LinkDiagnostics* diag) {
  if (!(p_in_w > 0.0)) throw ContractError("EAM: laser power must be positive");
  const RealVector& volts = t.value(v);
  ComplexVector e(volts.size());
  ComplexVector de(volts.size());
  std::size_t clamps = 0;
  for (Eigen::Index i = 0; i < volts.size(); ++i) {
    const EamSample s = eam_sample(volts[i], p_in_w, chirp_alpha, spline);
    e[i] = s.field;
    de[i] = s.d_field_dv;
    clamps += s.clamped ? 1 : 0;
  }
  if (diag != nullptr) diag->absorption_clamps += clamps;
  return t.record("eam_mod", std::move(e), {v.id}, [v, de = std::move(de)](ad::Tape& tp, std::size_t self) {
    // dL/dv = Re(conj(g) dE/dv)
    tp.accumulate(v.id, RealVector((tp.grad_complex(self).conjugate().cwiseProduct(de)).real()));
  });
}

ad::Cplx fiber(ad::Tape& t, ad::Cplx field, const LinkConfig& cfg, Mode mode) {
  if (cfg.fiber_km <= 0.0) return field;
  const double fs = cfg.sample_rate();
  if (cfg.fiber_model == FiberModel::ssfm) {
    if (mode == Mode::train) throw ConfigError("the SSFM fiber model is evaluation-only");
    const SsfmParams p{cfg.fiber_km,    cfg.gamma_per_w_km,          cfg.ssfm_step_km,
                       cfg.dispersion_ps_per_nm_km, cfg.wavelength_m, cfg.attenuation_db_per_km};
    return ad::untracked(t, field, [&](const ComplexVector& e) { return ssfm(ComplexSignal{e, fs}, p).samples; });
  }
  return ad::filter(t, field,
                    fiber_cd_response(t.value(field).size(), fs, cfg.fiber_km, cfg.dispersion_ps_per_nm_km,
                                      cfg.wavelength_m, cfg.attenuation_db_per_km));
}

ad::Real photodiode(ad::Tape& t, ad::Cplx field, const PhotodiodeParams& pd, double sample_rate, NoiseSource& noise) {
  ad::Real y = ad::abs2(t, field, pd.responsivity_a_per_w);
  if (!pd.noise) return y;
  const double mean_power = t.value(field).cwiseAbs2().mean();
  const double var = thermal_noise_variance(pd, sample_rate) + shot_noise_variance(pd, mean_power, sample_rate);
  return ad::add_constant(t, y, noise.gaussian(t.value(y).size(), std::sqrt(var)));
}

ad::Real adc(ad::Tape& t, ad::Real y, const LinkConfig& cfg, Mode mode) {
  if (cfg.bandlimit) {
    y = ad::filter(t, y, dsp::bessel_grid(cfg.bessel_order, cfg.adc_f3db_hz, t.value(y).size(), cfg.sample_rate()));
  }
  if (mode == Mode::eval && cfg.quantize_eval) {
    const int bits = cfg.quant_bits;
    y = ad::untracked(t, y, [bits](const RealVector& s) {
      const double lo = s.minCoeff();
      const double hi = s.maxCoeff();
      return hi > lo ? dsp::quantize_uniform(s, bits, lo, hi) : RealVector(s);
    });
  }
  return y;
}

ad::Cplx wdm_multiplex(ad::Tape& t, std::span<const ad::Cplx> channels, double spacing_hz, double sample_rate) {
  if (channels.empty()) throw ContractError("wdm_multiplex: no channels");
  if (channels.size() % 2 == 0) throw ContractError("wdm_multiplex: channel count must be odd");
  const Eigen::Index n = t.value(channels[0]).size();
  for (const ad::Cplx& c : channels) {
    if (t.value(c).size() != n) throw ContractError("wdm_multiplex: channel lengths differ");
  }
  const std::vector<double> offsets = wdm_offsets(static_cast<int>(channels.size()), spacing_hz);
  ad::Cplx sum{};
  for (std::size_t k = 0; k < channels.size(); ++k) {
    const ad::Cplx placed =
        offsets[k] == 0.0 ? channels[k] : ad::modulate(t, channels[k], carrier(n, sample_rate, offsets[k]));
    sum = k == 0 ? placed : ad::add(t, sum, placed);
  }
  return sum;
}

ad::Cplx wdm_select(ad::Tape& t, ad::Cplx field, double f3db_hz, int order, double sample_rate) {
  const RealVector h = dsp::super_gaussian_grid(0.0, f3db_hz, order, t.value(field).size(), sample_rate);
  return ad::filter(t, field, ComplexVector(h.cast<Complex>()));
}

}  // namespace e2e::link
