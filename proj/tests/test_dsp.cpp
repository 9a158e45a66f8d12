#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "e2e/constellation.hpp"
#include "e2e/dsp/analog.hpp"
#include "e2e/dsp/fft.hpp"
#include "e2e/dsp/fir.hpp"
#include "e2e/dsp/level.hpp"
#include "e2e/dsp/pulse.hpp"

using namespace e2e;
using namespace e2e::dsp;

namespace {

RealVector randn(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  RealVector v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// y[n] = sum_k h[k] x[n + c - k], written as a plain double loop.
RealVector direct_same(const RealVector& x, const RealVector& h) {
  const long n = x.size(), m = h.size(), c = (m - 1) / 2;
  RealVector y = RealVector::Zero(n);
  for (long i = 0; i < n; ++i) {
    for (long k = 0; k < m; ++k) {
      const long j = i + c - k;
      if (j >= 0 && j < n) y[i] += h[k] * x[j];
    }
  }
  return y;
}

double max_abs(const RealVector& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

// --- rrc -----------------------------------------------------------------

TEST(Rrc, ZeroRolloffIsNormalizedSinc) {
  FilterTaps h = rrc_taps(4, 8, 0.0);
  RealVector s(h.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double t = static_cast<double>(i - h.center()) / 4.0;
    s[i] = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
  }
  s.normalize();
  EXPECT_LE(max_abs(h.coeffs - s), 1e-12);
}

TEST(Rrc, SymmetricAndUnitEnergy) {
  for (double rho : {0.0, 0.01, 0.25, 0.5, 1.0}) {
    FilterTaps h = rrc_taps(4, 24, rho);
    EXPECT_EQ(h.size(), 97);
    EXPECT_LE(max_abs(h.coeffs - h.coeffs.reverse()), 1e-15);
    EXPECT_NEAR(h.coeffs.squaredNorm(), 1.0, 1e-14);
    Eigen::Index peak;
    h.coeffs.maxCoeff(&peak);
    EXPECT_EQ(peak, h.center());
  }
}

TEST(Rrc, SingularPointsAreFinite) {
  // t = T / (4 rho) lands on a sample for rho = 0.25 at sps 4
  FilterTaps h = rrc_taps(4, 8, 0.25);
  EXPECT_TRUE(h.coeffs.allFinite());
}

TEST(Rrc, NyquistAtSymbolSpacing) {
  FilterTaps h = rrc_taps(4, 24, 0.01);
  RealVector full = RealVector::Zero(2 * h.size() - 1);
  for (Eigen::Index i = 0; i < h.size(); ++i) full.segment(i, h.size()) += h.coeffs[i] * h.coeffs;
  const Eigen::Index mid = h.size() - 1;
  EXPECT_NEAR(full[mid], 1.0, 1e-12);
  double inner = 0.0;
  for (Eigen::Index k = 1; k < 12; ++k) {
    inner = std::max({inner, std::abs(full[mid + 4 * k]), std::abs(full[mid - 4 * k])});
  }
  EXPECT_LE(inner, 2e-2);
  // truncated tails meet at +-span/2 symbols; value from an independent numpy build
  EXPECT_NEAR(full[mid + 48], -0.03796845731482524, 1e-9);
  EXPECT_NEAR(full[mid - 48], -0.03796845731482524, 1e-9);
}

TEST(Rrc, Contracts) {
  EXPECT_THROW(rrc_taps(0, 24, 0.1), ContractError);
  EXPECT_THROW(rrc_taps(4, 1, 0.1), ContractError);
  EXPECT_THROW(rrc_taps(4, 24, 1.5), ContractError);
  EXPECT_THROW(rrc_taps(1, 3, 0.1), ContractError);  // even length
}

TEST(Rrc, InitTruncatesAndRenormalizes) {
  FilterTaps h = rrc_init(4, 25, 0.01);
  EXPECT_EQ(h.size(), 25);
  EXPECT_NEAR(h.coeffs.norm(), 1.0, 1e-12);
  FilterTaps full = rrc_taps(4, 24, 0.01);
  RealVector mid = full.coeffs.segment(full.center() - 12, 25);
  EXPECT_LE(max_abs(h.coeffs - mid.normalized()), 1e-14);
  FilterTaps wide = rrc_init(4, 151, 0.01);
  EXPECT_EQ(wide.size(), 151);
}

// --- fir ---------------------------------------------------------------

TEST(Fir, ImpulseTapsAreIdentity) {
  RealVector x = randn(50, 1);
  EXPECT_EQ(fir_convolve({x, 8.0}, FilterTaps::impulse(9, 1)).samples, x);
}

TEST(Fir, ImpulseInputReproducesTaps) {
  RealVector h = randn(7, 2);
  RealVector x = RealVector::Zero(21);
  x[10] = 1.0;
  RealVector y = fir_convolve({x, 1.0}, FilterTaps(h, 1)).samples;
  EXPECT_LE(max_abs(y.segment(7, 7) - h), 1e-15);
  EXPECT_EQ(y.head(7), RealVector::Zero(7));
}

TEST(Fir, MatchesDirectSum) {
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 10 + 12 * trial;
    const Eigen::Index m = 1 + 2 * (trial % 13);
    RealVector x = randn(n, 100 + trial);
    RealVector h = randn(m, 200 + trial);
    RealSignal y = fir_convolve({x, 3.0}, FilterTaps(h, 1));
    EXPECT_EQ(y.sample_rate, 3.0);
    EXPECT_LE(max_abs(y.samples - direct_same(x, h)), 1e-10);
  }
}

TEST(Fir, EvenTapsRejected) { EXPECT_THROW(FilterTaps(RealVector::Ones(4), 1), ContractError); }

// --- resampling --------------------------------------------------------

TEST(Resample, UpsampleDefinition) {
  RealVector s(2);
  s << 1.0, -1.0;
  RealVector expect(8);
  expect << 1, 0, 0, 0, -1, 0, 0, 0;
  RealSignal u = upsample(s, 4, 100e9);
  EXPECT_EQ(u.samples, expect);
  EXPECT_EQ(u.sample_rate, 400e9);
  EXPECT_EQ(upsample(s, 1, 1.0).samples, s);
}

TEST(Resample, UpsamplePreservesEnergy) {
  RealVector s = randn(100, 3);
  EXPECT_DOUBLE_EQ(upsample(s, 8, 1.0).samples.squaredNorm(), s.squaredNorm());
}

TEST(Resample, DownsampleDefinition) {
  RealVector x = RealVector::LinSpaced(12, 0, 11);
  RealVector expect(3);
  expect << 2, 6, 10;
  EXPECT_EQ(downsample(RealSignal{x, 1.0}, 4, 2), expect);
  EXPECT_EQ(downsample(RealSignal{x, 1.0}, 1, 0), x);
  EXPECT_EQ(downsample(RealSignal{RealVector::Ones(3), 1.0}, 4, 0).size(), 0);
  EXPECT_THROW(downsample(RealSignal{x, 1.0}, 4, 4), ContractError);
}

TEST(Resample, RoundTrip) {
  RealVector s = randn(64, 4);
  EXPECT_EQ(downsample(upsample(s, 4, 1.0), 4, 0), s);
}

// --- analog filters ----------------------------------------------------

TEST(Bessel, UnityDcAndHalfPowerAtCutoff) {
  BesselPrototype b(5, 45e9);
  EXPECT_NEAR(std::abs(b.response(0.0)), 1.0, 1e-14);
  EXPECT_NEAR(b.magnitude_squared(45e9), 0.5, 1e-6);
  for (int order : {1, 2, 3, 4, 6}) {
    EXPECT_NEAR(BesselPrototype(order, 20e9).magnitude_squared(20e9), 0.5, 1e-6) << order;
  }
}

TEST(Bessel, TwiceEqualsSquaredResponse) {
  RealVector x = randn(512, 5);
  const double fs = 800e9;
  RealSignal once = bessel_lpf({x, fs}, 5, 45e9);
  RealSignal twice = bessel_lpf(once, 5, 45e9);
  ComplexVector h = bessel_grid(5, 45e9, 512, fs);
  ComplexVector h2 = h.cwiseProduct(h);
  EXPECT_LE(max_abs(twice.samples - apply_response(x, h2)), 1e-10);
}

TEST(Bessel, RealInputStaysReal) {
  RealVector x = randn(500, 6);
  ComplexVector h = bessel_grid(5, 45e9, 500, 800e9);
  ComplexVector y = apply_response(ComplexVector(x.cast<Complex>()), h);
  EXPECT_LE(y.imag().norm(), 1e-10 * x.norm());
  RealVector x2 = randn(512, 7);
  ComplexVector h2 = bessel_grid(5, 45e9, 512, 800e9);
  ComplexVector y2 = apply_response(ComplexVector(x2.cast<Complex>()), h2);
  EXPECT_LE(y2.imag().norm(), 1e-10 * x2.norm());
}

TEST(Bessel, PreservesLengthAndRate) {
  RealSignal y = bessel_lpf({randn(333, 8), 400e9}, 5, 45e9);
  EXPECT_EQ(y.size(), 333);
  EXPECT_EQ(y.sample_rate, 400e9);
}

TEST(Bessel, CutoffAboveNyquistRejected) {
  EXPECT_THROW(bessel_lpf({randn(64, 9), 80e9}, 5, 45e9), ConfigError);
}

TEST(Bessel, GroupDelayFlatAndScaling) {
  const double tau = bessel_group_delay(5, 45e9);
  EXPECT_GT(tau, 0.0);
  EXPECT_NEAR(bessel_group_delay(5, 90e9), tau / 2.0, 1e-9 * tau);
  // independent oracle: -dphi/domega by central differences on the prototype
  BesselPrototype b(5, 45e9);
  double worst = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double f = 45e9 * k / 100.0;
    const double df = 1e6;
    const double d = std::arg(b.response(f + df) / b.response(f - df)) / (2.0 * std::numbers::pi * 2.0 * df);
    worst = std::max(worst, std::abs(-d - tau) / tau);
  }
  EXPECT_LE(worst, 0.05);
}

TEST(SuperGaussian, Shape) {
  EXPECT_DOUBLE_EQ(super_gaussian_response(10e9, 10e9, 65e9, 5), 1.0);
  const double up = super_gaussian_response(75e9, 10e9, 65e9, 5);
  const double dn = super_gaussian_response(-55e9, 10e9, 65e9, 5);
  EXPECT_NEAR(up * up, 0.5, 1e-9);
  EXPECT_NEAR(dn * dn, 0.5, 1e-9);
  EXPECT_LE(super_gaussian_response(130e9, 0.0, 65e9, 5), 1e-6);
}

TEST(SuperGaussian, RealAtZeroCenter) {
  RealVector x = randn(256, 10);
  RealSignal y = super_gaussian_bpf(RealSignal{x, 800e9}, 0.0, 65e9, 5);
  EXPECT_EQ(y.size(), 256);
  ComplexSignal z = super_gaussian_bpf(ComplexSignal{x.cast<Complex>(), 800e9}, 0.0, 65e9, 5);
  EXPECT_LE(z.samples.imag().norm(), 1e-10 * x.norm());
  EXPECT_LE(max_abs(z.samples.real() - y.samples), 1e-12);
  EXPECT_THROW(super_gaussian_bpf(RealSignal{x, 800e9}, 1e9, 65e9, 5), ContractError);
}

TEST(FrequencyFilters, Linear) {
  RealVector x = randn(300, 11), y = randn(300, 12);
  const double a = 1.7, b = -0.4;
  RealVector lhs = bessel_lpf({a * x + b * y, 400e9}, 5, 45e9).samples;
  RealVector rhs = a * bessel_lpf({x, 400e9}, 5, 45e9).samples + b * bessel_lpf({y, 400e9}, 5, 45e9).samples;
  EXPECT_LE(max_abs(lhs - rhs), 1e-10);
  ComplexVector cx = x.cast<Complex>(), cy = y.cast<Complex>() * Complex(0, 1);
  ComplexVector cl = super_gaussian_bpf(ComplexSignal{a * cx + b * cy, 800e9}, 100e9, 65e9, 5).samples;
  ComplexVector cr = a * super_gaussian_bpf(ComplexSignal{cx, 800e9}, 100e9, 65e9, 5).samples +
                     b * super_gaussian_bpf(ComplexSignal{cy, 800e9}, 100e9, 65e9, 5).samples;
  EXPECT_LE((cl - cr).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Fft, RoundTripAndFrequencies) {
  ComplexVector x = randn(37, 13).cast<Complex>();
  EXPECT_LE((ifft(fft(x)) - x).cwiseAbs().maxCoeff(), 1e-13);
  RealVector f = fft_frequencies(8, 8.0);
  RealVector expect(8);
  expect << 0, 1, 2, 3, -4, -3, -2, -1;
  EXPECT_EQ(f, expect);
}

// --- quantizer ---------------------------------------------------------

TEST(Quantizer, OneBit) {
  RealVector x(3);
  x << 0.3, -0.2, 5.0;
  RealVector q = quantize_uniform(x, 1, -1.0, 1.0);
  EXPECT_EQ(q[0], 1.0);
  EXPECT_EQ(q[1], -1.0);
  EXPECT_EQ(q[2], 1.0);
}

TEST(Quantizer, ThirtyTwoLevelsAndIdempotent) {
  RealVector x = RealVector::LinSpaced(100001, -2.0, 2.0);
  RealVector q = quantize_uniform(x, 5, -1.0, 1.0);
  std::set<double> levels(q.begin(), q.end());
  EXPECT_EQ(levels.size(), 32u);
  EXPECT_EQ(*levels.begin(), -1.0);
  EXPECT_EQ(*levels.rbegin(), 1.0);
  EXPECT_EQ(quantize_uniform(q, 5, -1.0, 1.0), q);
  EXPECT_THROW(quantize_uniform(x, 0, -1.0, 1.0), ContractError);
  EXPECT_THROW(quantize_uniform(x, 5, 1.0, 1.0), ContractError);
}

// --- levels ------------------------------------------------------------

TEST(PowerNormalize, Examples) {
  RealVector x = randn(100, 14);
  RealVector y = power_normalize(x, 1.0);
  EXPECT_NEAR(mean_power(y), 1.0, 1e-14);
  EXPECT_LE(max_abs(power_normalize(y, 1.0) - y), 1e-15);
  EXPECT_LE(max_abs(power_normalize(RealVector(7.0 * x), 1.0) - y), 1e-14);
  EXPECT_DOUBLE_EQ(Constellation::pam_unscaled(4).mean_power(), 5.0);
  EXPECT_NEAR(Constellation::pam(4).mean_power(), 1.0, 1e-15);
  EXPECT_THROW(power_normalize(RealVector(RealVector::Zero(4)), 1.0), ContractError);
}

TEST(UnitNorm, Examples) {
  RealVector c(3);
  c << 3.0, 4.0, 0.0;
  FilterTaps p = unit_norm_project(FilterTaps(c, 2));
  EXPECT_NEAR(p.coeffs[0], 0.6, 1e-15);
  EXPECT_NEAR(p.coeffs[1], 0.8, 1e-15);
  EXPECT_EQ(p.sps, 2);
  FilterTaps pp = unit_norm_project(p);
  EXPECT_LE(max_abs(pp.coeffs - p.coeffs), 1e-15);
  EXPECT_NEAR(pp.coeffs.norm(), 1.0, 1e-12);
  EXPECT_THROW(unit_norm_project(FilterTaps(RealVector::Zero(3), 1)), ContractError);
}
