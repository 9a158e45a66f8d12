#pragma once

#include <span>
#include <vector>

#include "e2e/ad/tape.hpp"
#include "e2e/link/config.hpp"
#include "e2e/link/random.hpp"

namespace e2e::link {

/// Counters for inputs that left a block's valid domain during a pass.
struct LinkDiagnostics {
  std::size_t negative_voltage_clamps = 0;
  std::size_t absorption_clamps = 0;
};

/// Per-sample noise std for a target Es/N0 (dB) of a real baseband signal
/// with the given mean sample power: sigma^2 = P * sps / (2 * 10^(snr/10)).
double awgn_noise_scale(double snr_db, double signal_power, int sps);

/// 4 k T Fs / (B Z).
double thermal_noise_variance(const PhotodiodeParams& pd, double sample_rate);
/// 2 e (R * mean_power + I_d) Fs / B, with mean_power the block's mean
/// received optical power in W.
double shot_noise_variance(const PhotodiodeParams& pd, double mean_power_w, double sample_rate);

// --- value-level blocks ------------------------------------------------------

/// sqrt(p_in * v), with negative voltages clamped to zero and counted.
ComplexVector ideal_mod_field(const RealVector& v, double p_in_w, std::size_t* clamps = nullptr);

/// A = sqrt(p_in 10^(-alpha(v)/10)),  E = A exp(j chirp/2 ln A^2).
ComplexVector eam_field(const RealVector& v, double p_in_w, double chirp_alpha, const AbsorptionSpline& spline,
                        std::size_t* clamps = nullptr);

/// All-pass dispersion exp(j D lambda^2 pi / c * L * f^2) with amplitude
/// attenuation 10^(-atten L / 20), on the FFT grid.
ComplexVector fiber_cd_response(Eigen::Index n, double sample_rate, double length_km, double dispersion_ps_per_nm_km,
                                double wavelength_m, double attenuation_db_per_km);

ComplexSignal fiber_cd(const ComplexSignal& field, double length_km, double dispersion_ps_per_nm_km,
                       double wavelength_m, double attenuation_db_per_km);

struct SsfmParams {
  double length_km = 1.0;
  double gamma_per_w_km = 1.3;
  double step_km = 0.25;
  double dispersion_ps_per_nm_km = -15.43;
  double wavelength_m = 1270e-9;
  double attenuation_db_per_km = 0.2;
};

/// Symmetric split-step Fourier propagation without amplification. Each
/// step is half linear, full Kerr phase, half linear; a remainder shorter
/// than step_km forms the last step.
ComplexSignal ssfm(const ComplexSignal& field, const SsfmParams& params);

/// Channel frequency offsets {-(n-1)/2, ..., (n-1)/2} * spacing.
std::vector<double> wdm_offsets(int n_channels, double spacing_hz);

/// exp(j 2 pi offset t), t = k / fs.
ComplexVector carrier(Eigen::Index n, double sample_rate, double offset_hz);

// --- tape blocks -------------------------------------------------------------

/// v = v_b + v_pp * clip(g_dac x, -1/2, 1/2), then the DAC Bessel filter. In
/// evaluation mode the clipped signal is quantized before the v_pp scaling.
ad::Real dac(ad::Tape& t, ad::Real x, ad::Real g_dac, ad::Real v_b, const LinkConfig& cfg, Mode mode);

ad::Cplx ideal_mod(ad::Tape& t, ad::Real v, double p_in_w, LinkDiagnostics* diag = nullptr);

ad::Cplx eam_mod(ad::Tape& t, ad::Real v, double p_in_w, double chirp_alpha, const AbsorptionSpline& spline,
                 LinkDiagnostics* diag = nullptr);

/// Fiber per cfg.fiber_km and cfg.fiber_model. The SSFM model is an
/// evaluation-only block.
ad::Cplx fiber(ad::Tape& t, ad::Cplx field, const LinkConfig& cfg, Mode mode);

/// Square-law detection R |E|^2 plus thermal and shot noise, the noise
/// entering as a constant.
ad::Real photodiode(ad::Tape& t, ad::Cplx field, const PhotodiodeParams& pd, double sample_rate, NoiseSource& noise);

/// ADC Bessel filter; in evaluation mode, quantization over the block's
/// [min, max].
ad::Real adc(ad::Tape& t, ad::Real y, const LinkConfig& cfg, Mode mode);

/// Places channel k at wdm_offsets(k) and sums. The caller orders channels
/// by offset.
ad::Cplx wdm_multiplex(ad::Tape& t, std::span<const ad::Cplx> channels, double spacing_hz, double sample_rate);

/// Zero-phase super-Gaussian channel selection around 0 Hz.
ad::Cplx wdm_select(ad::Tape& t, ad::Cplx field, double f3db_hz, int order, double sample_rate);

}  // namespace e2e::link
