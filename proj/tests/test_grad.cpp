#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "e2e/ad/check.hpp"
#include "e2e/ad/ops.hpp"
#include "e2e/dsp/analog.hpp"
#include "e2e/link/blocks.hpp"

using namespace e2e;
using namespace e2e::ad;

namespace {

RealVector randn(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  RealVector v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// f(p) = <w, body(p)>, with w fixed, so every output coordinate is exercised.
ScalarFunction projected(std::function<Real(Tape&, Real)> body, Eigen::Index n_out, std::uint64_t seed = 99) {
  RealVector w = randn(n_out, seed);
  return [body, w](const RealVector& p, RealVector* grad) {
    Tape t;
    GradSlot slot(p);
    Real out = body(t, t.parameter(slot));
    Real loss = dot(t, out, t.constant(w));
    const double v = t.value(loss)[0];
    if (grad) {
      t.backward(loss);
      *grad = slot.grad;
    }
    return v;
  };
}

}  // namespace

TEST(FiniteDiff, SquareAtThree) {
  ScalarFunction f = [](const RealVector& p, RealVector* g) {
    if (g) *g = 2.0 * p;
    return p[0] * p[0];
  };
  RealVector x(1);
  x << 3.0;
  EXPECT_LE(finite_diff_check(f, x, 1e-5).max_rel_error, 1e-8);
}

TEST(FiniteDiff, ClipInsideLinearRegion) {
  RealVector x(4);
  x << -0.3, -0.1, 0.2, 0.45;
  auto f = projected([](Tape& t, Real p) { return clip(t, p, -0.5, 0.5); }, 4);
  EXPECT_LE(finite_diff_check(f, x).max_rel_error, 1e-6);
}

TEST(FiniteDiff, NanIsReported) {
  ScalarFunction f = [](const RealVector&, RealVector*) { return std::nan(""); };
  EXPECT_THROW(finite_diff_check(f, RealVector::Zero(2)), AdjointError);
}

TEST(Backward, ConstantLossGivesZeroGrad) {
  Tape t;
  GradSlot h(randn(7, 1));
  t.parameter(h);
  RealVector c(1);
  c << 4.2;
  t.backward(t.constant(c));
  EXPECT_EQ(h.grad, RealVector::Zero(7));
}

TEST(Backward, InnerProductGivesTwiceH) {
  Tape t;
  RealVector h0 = randn(11, 2);
  GradSlot h(h0);
  Real p = t.parameter(h);
  t.backward(dot(t, p, p));
  EXPECT_LE((h.grad - 2.0 * h0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Backward, NonScalarLossRejected) {
  Tape t;
  GradSlot h(randn(3, 3));
  Real p = t.parameter(h);
  EXPECT_THROW(t.backward(p), ContractError);
}

TEST(Backward, NanNodeIsNamed) {
  Tape t;
  GradSlot h(RealVector::Zero(2));
  Real p = t.parameter(h);
  const std::size_t in = p.id;
  Real bad = t.record("poison", t.value(p), {in}, [in](Tape& tape, std::size_t self) {
    RealVector g = tape.grad_real(self);
    g.setConstant(std::nan(""));
    tape.accumulate(in, g);
  });
  try {
    t.backward(dot(t, bad, t.constant(RealVector(RealVector::Ones(2)))));
    FAIL() << "expected AdjointError";
  } catch (const AdjointError& e) {
    EXPECT_NE(std::string(e.what()).find("poison"), std::string::npos);
  }
}

TEST(Backward, LinearityInLossScale) {
  RealVector h0 = randn(9, 4);
  RealVector x = randn(64, 5);
  auto grad_for = [&](double a) {
    Tape t;
    GradSlot h(h0);
    Real y = fir(t, t.constant(x), t.parameter(h));
    Real loss = affine(t, mse(t, y, RealVector::Zero(64)), a);
    t.backward(loss);
    return h.grad;
  };
  RealVector g1 = grad_for(1.0);
  RealVector g3 = grad_for(-3.5);
  EXPECT_LE((g3 + 3.5 * g1).cwiseAbs().maxCoeff(), 1e-12 * g1.cwiseAbs().maxCoeff());
}

TEST(Backward, Deterministic) {
  RealVector h0 = randn(15, 6);
  RealVector x = randn(200, 7);
  auto run = [&] {
    Tape t;
    GradSlot h(h0);
    Real y = power_normalize(t, fir(t, t.constant(x), t.parameter(h)), 1.0);
    t.backward(mse(t, y, x));
    return h.grad;
  };
  RealVector a = run();
  RealVector b = run();
  EXPECT_EQ(a, b);
}

// Gradient checks for each differentiable block on random instances.

struct OpCase {
  const char* name;
  Eigen::Index n_in;
  Eigen::Index n_out;
  std::function<Real(Tape&, Real)> body;
};

class OpGradient : public ::testing::TestWithParam<int> {};

namespace {

std::vector<OpCase> op_cases() {
  const Eigen::Index n = 256;
  RealVector x = randn(n, 11);
  RealVector taps = randn(15, 12);
  ComplexVector bessel = dsp::bessel_grid(5, 45e9, n, 400e9);
  RealVector sg = dsp::super_gaussian_grid(0.0, 65e9, 5, n, 800e9);
  ComplexVector cd = link::fiber_cd_response(n, 800e9, 1.0, -15.43, 1270e-9, 0.2);
  ComplexVector carrier = link::carrier(n, 800e9, 200e9);
  RealVector c = randn(n, 13);
  return {
      {"fir_taps", 15, n, [x](Tape& t, Real p) { return fir(t, t.constant(x), p); }},
      {"fir_input", n, n, [taps](Tape& t, Real p) { return fir(t, p, t.constant(taps)); }},
      {"downsample", n, n / 4, [](Tape& t, Real p) { return downsample(t, p, 4, 1); }},
      {"slice", n, 100, [](Tape& t, Real p) { return slice(t, p, 30, 100); }},
      {"bessel", n, n, [bessel](Tape& t, Real p) { return filter(t, p, bessel); }},
      {"super_gaussian", n, n,
       [sg](Tape& t, Real p) {
         ComplexVector h = sg.cast<Complex>();
         return real_part(t, filter(t, to_complex(t, p), h));
       }},
      {"cd_abs2", n, n, [cd](Tape& t, Real p) { return abs2(t, filter(t, to_complex(t, p), cd), 3.0); }},
      {"carrier_abs2", n, n,
       [cd, carrier](Tape& t, Real p) {
         Cplx z = modulate(t, to_complex(t, p), carrier);
         return abs2(t, add(t, z, filter(t, z, cd)));
       }},
      {"clip", n, n, [](Tape& t, Real p) { return clip(t, affine(t, p, 0.1), -0.5, 0.5); }},
      {"noise_constant", n, n, [c](Tape& t, Real p) { return add_constant(t, abs2(t, to_complex(t, p)), c); }},
      {"remove_mean", n, n, [](Tape& t, Real p) { return remove_mean(t, p); }},
      {"power_normalize", n, n, [](Tape& t, Real p) { return power_normalize(t, p, 2.0); }},
      {"mse", n, 1, [x](Tape& t, Real p) { return mse(t, p, x); }},
      {"scalar_gain", 1, n, [x](Tape& t, Real p) { return mul_scalar(t, t.constant(x), p); }},
      {"scalar_bias", 1, n, [x](Tape& t, Real p) { return add_scalar(t, t.constant(x), p); }},
  };
}

}  // namespace

TEST_P(OpGradient, MatchesCentralDifferences) {
  const OpCase c = op_cases()[GetParam()];
  RealVector p = randn(c.n_in, 100 + GetParam());
  GradCheck r = finite_diff_check(projected(c.body, c.n_out), p);
  EXPECT_LE(r.max_rel_error, 1e-4) << c.name << " worst index " << r.worst_index;
}

INSTANTIATE_TEST_SUITE_P(Blocks, OpGradient, ::testing::Range(0, 15));

TEST(Untracked, IsAConstant) {
  Tape t;
  GradSlot h(randn(8, 20));
  Real q = untracked(t, t.parameter(h), [](const RealVector& v) { return RealVector(v.array().round()); });
  EXPECT_FALSE(t.requires_grad(q));
}
