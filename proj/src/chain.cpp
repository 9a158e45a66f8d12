#include "e2e/link/chain.hpp"

#include <cmath>

#include "e2e/ad/ops.hpp"
#include "e2e/dsp/analog.hpp"
#include "e2e/dsp/fir.hpp"
#include "e2e/eq/equalizers.hpp"

namespace e2e::link {

Eigen::Index alignment_delay_samples(const LinkConfig& cfg) {
  if (!cfg.bandlimit) return 0;
  const double gd = dsp::bessel_group_delay(cfg.bessel_order, cfg.dac_f3db_hz) +
                    dsp::bessel_group_delay(cfg.bessel_order, cfg.adc_f3db_hz);
  return static_cast<Eigen::Index>(std::lround(gd * cfg.sample_rate()));
}

Eigen::Index guard_symbols(const LinkConfig& cfg, Eigen::Index total_taps) {
  const Eigen::Index sps = cfg.sps;
  return (total_taps + sps - 1) / sps + (alignment_delay_samples(cfg) + sps - 1) / sps + 16;
}

Batch draw_batch(const LinkConfig& cfg, Eigen::Index count, Eigen::Index guard, std::mt19937_64& rng) {
  if (count < 1 || guard < 0) throw ContractError("draw_batch: bad block size");
  Batch b;
  b.guard = guard;
  const int n_channels = cfg.wdm.enabled ? cfg.wdm.n_channels : 1;
  for (int c = 0; c < n_channels; ++c) b.channels.push_back(draw_pam_symbols(cfg.pam_order, count + 2 * guard, rng));
  return b;
}

namespace {

void check_batch(const LinkConfig& cfg, const Batch& batch) {
  if (batch.channels.empty() || batch.count() < 1) throw ContractError("link: empty batch");
  const std::size_t expected = cfg.wdm.enabled ? static_cast<std::size_t>(cfg.wdm.n_channels) : 1;
  if (batch.channels.size() != expected) throw ContractError("link: batch channel count does not match config");
  for (const RealVector& c : batch.channels) {
    if (c.size() != batch.total()) throw ContractError("link: channel lengths differ");
  }
}

ad::Real transmit_filter(ad::Tape& t, const LinkConfig& cfg, const ChainParams& p, const RealVector& symbols) {
  const RealSignal up = dsp::upsample(symbols, cfg.sps, cfg.symbol_rate_hz);
  return ad::fir(t, t.constant(up.samples, "symbols"), p.h_p);
}

/// Channel order for the multiplexer: channel of interest in the middle.
template <typename H>
std::vector<H> by_offset(const std::vector<H>& channels) {
  const std::size_t mid = channels.size() / 2;
  std::vector<H> out(channels.size());
  out[mid] = channels[0];
  std::size_t next = 1;
  for (std::size_t k = 0; k < channels.size(); ++k) {
    if (k != mid) out[k] = channels[next++];
  }
  return out;
}

ad::Real normalize(ad::Tape& t, ad::Real x, bool remove_dc) {
  if (remove_dc) x = ad::remove_mean(t, x);
  return ad::power_normalize(t, x, 1.0);
}

ChainOutput receive(ad::Tape& t, const LinkConfig& cfg, const ChainParams& p, const Batch& batch, ad::Real r,
                    LinkDiagnostics diag) {
  const bool imdd = cfg.is_imdd();
  r = ad::fir(t, r, p.h_r);
  if (p.ffe) r = ad::fir(t, r, *p.ffe);
  if (p.volterra_k1 && p.volterra_k2) {
    // The quadratic kernel sees a zero-mean, unit-power input.
    r = eq::volterra2(t, normalize(t, r, imdd), *p.volterra_k1, *p.volterra_k2, p.volterra_n2);
  }
  const Eigen::Index delay = alignment_delay_samples(cfg);
  const int sps = cfg.sps;
  ChainOutput out;
  out.oversampled = t.value(r);
  out.first_sample = batch.guard * sps + delay;
  ad::Real d = ad::downsample(t, r, sps, static_cast<int>(delay % sps));
  d = ad::slice(t, d, batch.guard + delay / sps, batch.count());
  const RealVector raw = t.value(d);
  out.dc = imdd ? raw.mean() : 0.0;
  d = normalize(t, d, imdd);
  const double p_raw = (raw.array() - out.dc).square().mean();
  out.gain = 1.0 / std::sqrt(p_raw);
  out.soft = d;
  out.diagnostics = diag;
  return out;
}

}  // namespace

ChainOutput awgn_link_forward(ad::Tape& t, const LinkConfig& cfg, const ChainParams& p, const Batch& batch,
                              double snr_db, NoiseSource& noise, Mode mode) {
  (void)mode;
  if (cfg.kind != LinkKind::awgn) throw ConfigError("awgn_link_forward: link kind is not awgn");
  check_batch(cfg, batch);
  const double fs = cfg.sample_rate();
  std::vector<ad::Real> tx;
  for (const RealVector& symbols : batch.channels) {
    ad::Real y = transmit_filter(t, cfg, p, symbols);
    if (cfg.bandlimit) y = ad::filter(t, y, dsp::bessel_grid(cfg.bessel_order, cfg.dac_f3db_hz, t.value(y).size(), fs));
    tx.push_back(y);
  }
  const Eigen::Index n = t.value(tx[0]).size();
  const double sigma = awgn_noise_scale(snr_db, t.value(tx[0]).squaredNorm() / static_cast<double>(n), cfg.sps);
  ad::Real r;
  if (!cfg.wdm.enabled) {
    r = sigma > 0.0 ? ad::add_constant(t, tx[0], noise.gaussian(n, sigma)) : tx[0];
  } else {
    std::vector<ad::Cplx> fields;
    for (ad::Real y : tx) fields.push_back(ad::to_complex(t, y));
    ad::Cplx z = wdm_multiplex(t, by_offset(fields), cfg.wdm.spacing_hz, fs);
    if (sigma > 0.0) {
      const RealVector re = noise.gaussian(n, sigma);
      const RealVector im = noise.gaussian(n, sigma);
      ComplexVector w(n);
      w.real() = re;
      w.imag() = im;
      z = ad::add_constant(t, z, w);
    }
    z = wdm_select(t, z, cfg.wdm.select_f3db_hz, cfg.wdm.select_order, fs);
    r = ad::real_part(t, z);
  }
  if (cfg.bandlimit) r = ad::filter(t, r, dsp::bessel_grid(cfg.bessel_order, cfg.adc_f3db_hz, n, fs));
  return receive(t, cfg, p, batch, r, {});
}

ChainOutput imdd_link_forward(ad::Tape& t, const LinkConfig& cfg, const ChainParams& p, const Batch& batch,
                              NoiseSource& noise, Mode mode) {
  if (!cfg.is_imdd()) throw ConfigError("imdd_link_forward: link kind is not IM/DD");
  check_batch(cfg, batch);
  const double fs = cfg.sample_rate();
  const double p_in = cfg.laser_power_w();
  LinkDiagnostics diag;
  std::vector<ad::Cplx> fields;
  for (const RealVector& symbols : batch.channels) {
    const ad::Real v = dac(t, transmit_filter(t, cfg, p, symbols), p.g_dac, p.v_b, cfg, mode);
    fields.push_back(cfg.kind == LinkKind::imdd_eam ? eam_mod(t, v, p_in, cfg.chirp_alpha, cfg.absorption, &diag)
                                                    : ideal_mod(t, v, p_in, &diag));
  }
  ad::Cplx e = cfg.wdm.enabled ? wdm_multiplex(t, by_offset(fields), cfg.wdm.spacing_hz, fs) : fields[0];
  e = fiber(t, e, cfg, mode);
  if (cfg.wdm.enabled) e = wdm_select(t, e, cfg.wdm.select_f3db_hz, cfg.wdm.select_order, fs);
  ad::Real i = photodiode(t, e, cfg.photodiode, fs, noise);
  i = adc(t, i, cfg, mode);
  return receive(t, cfg, p, batch, i, diag);
}

ChainOutput link_forward(ad::Tape& t, const LinkConfig& cfg, const ChainParams& p, const Batch& batch, double snr_db,
                         NoiseSource& noise, Mode mode) {
  return cfg.is_imdd() ? imdd_link_forward(t, cfg, p, batch, noise, mode)
                       : awgn_link_forward(t, cfg, p, batch, snr_db, noise, mode);
}

}  // namespace e2e::link
