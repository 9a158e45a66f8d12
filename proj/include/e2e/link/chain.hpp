#pragma once

#include <optional>
#include <vector>

#include "e2e/ad/tape.hpp"
#include "e2e/link/blocks.hpp"

namespace e2e::link {

/// Tape handles of everything the DSP chain may learn. Handles of frozen
/// parameters are plain tape constants.
struct ChainParams {
  ad::Real h_p;
  ad::Real h_r;
  std::optional<ad::Real> ffe;
  /// Second-order Volterra equalizer (packed kernels, see eq::VolterraKernel).
  std::optional<ad::Real> volterra_k1;
  std::optional<ad::Real> volterra_k2;
  Eigen::Index volterra_n2 = 0;
  /// One-element DAC gain and bias, IM/DD only.
  ad::Real g_dac;
  ad::Real v_b;
};

/// Symbols of one block. channels[0] is the channel of interest; further
/// entries are WDM interferers. The first and last `guard` symbols absorb
/// filter transients and are excluded from loss and SER.
struct Batch {
  std::vector<RealVector> channels;
  Eigen::Index guard = 0;

  Eigen::Index total() const { return channels.empty() ? 0 : channels.front().size(); }
  Eigen::Index count() const { return total() - 2 * guard; }
  RealVector target() const { return channels.front().segment(guard, count()); }
};

struct ChainOutput {
  /// Soft symbols, aligned with Batch::target(), unit mean power.
  ad::Real soft;
  /// Receiver output before downsampling.
  RealVector oversampled;
  /// Index into `oversampled` of the sampling instant of the first target
  /// symbol; later symbols follow every sps samples.
  Eigen::Index first_sample = 0;
  /// soft = (oversampled[sampling instants] - dc) * gain.
  double dc = 0.0;
  double gain = 1.0;
  LinkDiagnostics diagnostics;
};

/// Coarse end-to-end delay in samples: both converter Bessel filters'
/// group delay, rounded. Same-mode FIRs and zero-phase filters add none.
Eigen::Index alignment_delay_samples(const LinkConfig& cfg);

/// Guard symbols per block side for the given total receiver and
/// transmitter tap count.
Eigen::Index guard_symbols(const LinkConfig& cfg, Eigen::Index total_taps);

/// Draws `count + 2 guard` symbols for the channel of interest and, with
/// WDM enabled, each interferer.
Batch draw_batch(const LinkConfig& cfg, Eigen::Index count, Eigen::Index guard, std::mt19937_64& rng);

/// upsample -> h_p -> DAC Bessel -> AWGN (or WDM mux + noise + select) ->
/// ADC Bessel -> receiver.
ChainOutput awgn_link_forward(ad::Tape& t, const LinkConfig& cfg, const ChainParams& p, const Batch& batch,
                              double snr_db, NoiseSource& noise, Mode mode);

/// upsample -> h_p -> DAC -> modulator -> [WDM mux] -> fiber -> [select] ->
/// photodiode -> ADC -> receiver, with the launch power cfg.laser_power_w().
ChainOutput imdd_link_forward(ad::Tape& t, const LinkConfig& cfg, const ChainParams& p, const Batch& batch,
                              NoiseSource& noise, Mode mode);

/// Dispatches on cfg.kind; snr_db is ignored for IM/DD links.
ChainOutput link_forward(ad::Tape& t, const LinkConfig& cfg, const ChainParams& p, const Batch& batch, double snr_db,
                         NoiseSource& noise, Mode mode);

}  // namespace e2e::link
