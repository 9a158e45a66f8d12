#include "e2e/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "e2e/dsp/analog.hpp"
#include "e2e/dsp/fft.hpp"

namespace e2e::metrics {

SerEstimate wilson(std::size_t errors, std::size_t symbols, double z) {
  if (symbols == 0) throw ContractError("SER over zero symbols");
  if (errors > symbols) throw ContractError("more errors than symbols");
  const double n = static_cast<double>(symbols);
  const double p = static_cast<double>(errors) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // rounding can leave the bounds a few ulp past p at the extremes
  return {errors, symbols, p, std::min(p, std::max(0.0, center - half)), std::max(p, std::min(1.0, center + half))};
}

RealVector decide(const RealVector& soft, const Constellation& constellation) {
  const RealVector& lv = constellation.levels;
  if (lv.size() == 0) throw ContractError("decide: empty constellation");
  RealVector out(soft.size());
  for (Eigen::Index i = 0; i < soft.size(); ++i) {
    // Levels are sorted; pick the first level whose upper midpoint is >= x.
    Eigen::Index k = 0;
    while (k + 1 < lv.size() && soft[i] > 0.5 * (lv[k] + lv[k + 1])) ++k;
    out[i] = lv[k];
  }
  return out;
}

Eigen::Index estimate_delay(const RealVector& x_hat, const RealVector& x, Eigen::Index max_lag) {
  if (max_lag < 0) throw ContractError("estimate_delay: negative max_lag");
  double best = -1.0;
  Eigen::Index best_lag = 0;
  for (Eigen::Index lag = -max_lag; lag <= max_lag; ++lag) {
    // pairs (x_hat[n + lag], x[n])
    const Eigen::Index n0 = std::max<Eigen::Index>(0, -lag);
    const Eigen::Index n1 = std::min<Eigen::Index>(x.size(), x_hat.size() - lag);
    const Eigen::Index len = n1 - n0;
    if (len < 100) continue;
    const auto a = x_hat.segment(n0 + lag, len);
    const auto b = x.segment(n0, len);
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) continue;
    const double c = std::abs(a.dot(b)) / (na * nb);
    if (c > best) {
      best = c;
      best_lag = lag;
    }
  }
  if (best < 0.1) throw ContractError("estimate_delay: alignment failed (correlation peak below 0.1)");
  return best_lag;
}

SerEstimate ser(const RealVector& decided, const RealVector& truth) {
  if (decided.size() != truth.size()) throw ContractError("ser: length mismatch");
  if (decided.size() == 0) throw ContractError("ser: empty sequences");
  const auto errors = static_cast<std::size_t>((decided.array() != truth.array()).count());
  return wilson(errors, static_cast<std::size_t>(decided.size()));
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double theory_ser_pam(int order, double snr_db) {
  if (order < 2) throw ContractError("theory_ser_pam: order must be >= 2");
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  const double m = order;
  const double snr = std::pow(10.0, snr_db / 10.0);
  return 2.0 * (m - 1.0) / m * q_function(std::sqrt(6.0 / (m * m - 1.0) * snr));
}

double theory_snr_for_ser(int order, double ser) {
  const double top = 2.0 * (order - 1.0) / order * 0.5;
  if (!(ser > 0.0) || ser >= top) throw ContractError("theory_snr_for_ser: SER out of range");
  double lo = -30.0;
  double hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (theory_ser_pam(order, mid) > ser ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double kp4_threshold() { return std::log2(4.0) * 2.4e-4; }

IsiMetric fold_response(const ComplexVector& total, int sps, double symbol_rate) {
  if (sps < 1 || total.size() % sps != 0) throw ContractError("fold_response: grid not divisible by sps");
  const Eigen::Index bins = total.size() / sps;
  IsiMetric m;
  m.frequency_hz.resize(bins);
  m.folded = RealVector::Zero(bins);
  for (Eigen::Index k = 0; k < bins; ++k) {
    m.frequency_hz[k] = symbol_rate * static_cast<double>(k) / static_cast<double>(bins);
    for (int a = 0; a < sps; ++a) m.folded[k] += std::abs(total[k + a * bins]);
  }
  const double mean_abs = m.folded.cwiseAbs().mean();
  if (!(mean_abs > 0.0)) throw ContractError("fold_response: zero response");
  const double mean = m.folded.mean();
  m.flatness = std::sqrt((m.folded.array() - mean).square().mean()) / mean_abs;
  return m;
}

namespace {

ComplexVector taps_response(const RealVector& h, Eigen::Index n) {
  if (h.size() > n) throw ContractError("nyquist_isi_metric: grid shorter than filter");
  ComplexVector padded = ComplexVector::Zero(n);
  padded.head(h.size()) = h.cast<Complex>();
  return dsp::fft(padded);
}

}  // namespace

IsiMetric nyquist_isi_metric(const RealVector& h_p, const RealVector& h_r, const link::LinkConfig& cfg,
                             const RealVector* ffe, Eigen::Index bins) {
  const Eigen::Index n = cfg.sps * bins;
  const double fs = cfg.sample_rate();
  ComplexVector total = taps_response(h_p, n).cwiseProduct(taps_response(h_r, n));
  if (ffe != nullptr) total = total.cwiseProduct(taps_response(*ffe, n));
  if (cfg.bandlimit) {
    total = total.cwiseProduct(dsp::bessel_grid(cfg.bessel_order, cfg.dac_f3db_hz, n, fs))
                .cwiseProduct(dsp::bessel_grid(cfg.bessel_order, cfg.adc_f3db_hz, n, fs));
  }
  return fold_response(total, cfg.sps, cfg.symbol_rate_hz);
}

RealMatrix eye_diagram(const RealVector& signal, int sps, Eigen::Index first, Eigen::Index n_traces) {
  if (sps < 1 || n_traces < 1) throw ContractError("eye_diagram: bad arguments");
  if (signal.size() < 2 * sps * n_traces) throw ContractError("eye_diagram: signal too short");
  if (first < sps || first + (n_traces - 1) * sps + sps >= signal.size()) {
    throw ContractError("eye_diagram: traces exceed the signal");
  }
  RealMatrix eye(n_traces, 2 * sps + 1);
  for (Eigen::Index k = 0; k < n_traces; ++k) {
    eye.row(k) = signal.segment(first + k * sps - sps, 2 * sps + 1).transpose();
  }
  return eye;
}

double eye_opening(const RealVector& at_phase, const RealVector& sent, const Constellation& constellation) {
  if (at_phase.size() != sent.size()) throw ContractError("eye_opening: length mismatch");
  const RealVector& lv = constellation.levels;
  double opening = std::numeric_limits<double>::infinity();
  for (Eigen::Index l = 0; l + 1 < lv.size(); ++l) {
    double top_of_low = -std::numeric_limits<double>::infinity();
    double bottom_of_high = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < sent.size(); ++i) {
      if (sent[i] == lv[l]) top_of_low = std::max(top_of_low, at_phase[i]);
      if (sent[i] == lv[l + 1]) bottom_of_high = std::min(bottom_of_high, at_phase[i]);
    }
    opening = std::min(opening, bottom_of_high - top_of_low);
  }
  return opening;
}

double student_t975(int dof) {
  static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                     2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                     2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof < 1) throw ContractError("student_t975: dof must be >= 1");
  if (dof <= 30) return table[dof - 1];
  return 1.959963984540054 + 2.4 / dof;
}

MeanInterval restart_interval(std::span<const SerEstimate> runs) {
  if (runs.empty()) throw ContractError("restart_interval: no runs");
  std::size_t errors = 0;
  std::size_t symbols = 0;
  double mean = 0.0;
  for (const SerEstimate& r : runs) {
    errors += r.errors;
    symbols += r.symbols;
    mean += r.rate;
  }
  mean /= static_cast<double>(runs.size());
  const SerEstimate pooled = wilson(errors, symbols);
  MeanInterval out{mean, pooled.ci_lo, pooled.ci_hi};
  if (runs.size() > 1) {
    double var = 0.0;
    for (const SerEstimate& r : runs) var += (r.rate - mean) * (r.rate - mean);
    var /= static_cast<double>(runs.size() - 1);
    const double half = student_t975(static_cast<int>(runs.size()) - 1) * std::sqrt(var / runs.size());
    out.lo = std::min(out.lo, std::max(0.0, mean - half));
    out.hi = std::max(out.hi, mean + half);
  }
  out.lo = std::min(out.lo, mean);
  out.hi = std::max(out.hi, mean);
  return out;
}

bool intervals_overlap(double lo_a, double hi_a, double lo_b, double hi_b) { return lo_a <= hi_b && lo_b <= hi_a; }

}  // namespace e2e::metrics
