#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "e2e/constellation.hpp"
#include "e2e/link/config.hpp"

namespace e2e::metrics {

using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;

struct SerEstimate {
  std::size_t errors = 0;
  std::size_t symbols = 0;
  double rate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

/// Wilson score interval for a binomial proportion, default 95 %.
SerEstimate wilson(std::size_t errors, std::size_t symbols, double z = 1.959963984540054);

/// Nearest constellation level per sample; a tie goes to the smaller level.
RealVector decide(const RealVector& soft, const Constellation& constellation);

/// Lag in [-max_lag, max_lag] maximizing |normalized cross-correlation|,
/// with x_hat[n + lag] ~ x[n]. Throws ContractError if the peak is below 0.1
/// or the overlap is shorter than 100 samples.
Eigen::Index estimate_delay(const RealVector& x_hat, const RealVector& x, Eigen::Index max_lag);

/// Symbol mismatch fraction of two aligned decision sequences.
SerEstimate ser(const RealVector& decided, const RealVector& truth);

/// Gaussian tail probability.
double q_function(double x);

/// 2 (M-1)/M Q(sqrt(6/(M^2-1) snr)) for PAM-M over an unlimited AWGN channel.
double theory_ser_pam(int order, double snr_db);

/// Inverse of theory_ser_pam in snr_db (bisection).
double theory_snr_for_ser(int order, double ser);

/// KP4 FEC threshold in SER terms: log2(4) * 2.4e-4.
double kp4_threshold();

struct IsiMetric {
  /// Folding-interval frequencies [0, symbol_rate).
  RealVector frequency_hz;
  /// B(f) = sum_m |H(f + m symbol_rate)|.
  RealVector folded;
  /// std(B) / mean(|B|).
  double flatness = 0.0;
};

/// Folds a total response sampled on an FFT grid of n = sps * bins points.
IsiMetric fold_response(const ComplexVector& total, int sps, double symbol_rate);

/// Total linear response h_p * DAC * ADC * h_r [* ffe] of a link on a grid
/// of sps * bins points, folded onto one symbol-rate interval. Magnitudes
/// are folded, so the score ignores pure delay.
IsiMetric nyquist_isi_metric(const RealVector& h_p, const RealVector& h_r, const link::LinkConfig& cfg,
                             const RealVector* ffe = nullptr, Eigen::Index bins = 256);

/// Traces of 2 sps + 1 samples, trace k centered on signal[first + k sps];
/// column sps holds the sampling instant.
RealMatrix eye_diagram(const RealVector& signal, int sps, Eigen::Index first, Eigen::Index n_traces);

/// Smallest gap between adjacent levels at the sampling instant:
/// min over l of (min of samples sent as level l+1) - (max of those sent as l).
/// Negative when the eye is closed.
double eye_opening(const RealVector& at_phase, const RealVector& sent, const Constellation& constellation);

struct MeanInterval {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Two-sided 97.5 % Student-t quantile.
double student_t975(int dof);

/// Mean of per-restart SERs with a 95 % interval: the t-interval over
/// restarts, widened to include the Wilson interval of the pooled counts.
MeanInterval restart_interval(std::span<const SerEstimate> runs);

bool intervals_overlap(double lo_a, double hi_a, double lo_b, double hi_b);

}  // namespace e2e::metrics
