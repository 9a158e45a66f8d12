#include "e2e/ad/ops.hpp"

#include <cmath>

#include "e2e/dsp/fft.hpp"
#include "e2e/dsp/fir.hpp"

namespace e2e::ad {

namespace {

void require_same_size(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) throw ContractError(std::string(what) + ": operand lengths differ");
}

void require_scalar(const RealVector& v, const char* what) {
  if (v.size() != 1) throw ContractError(std::string(what) + ": expected a one-element operand");
}

}  // namespace

Real add(Tape& t, Real a, Real b) {
  require_same_size(t.value(a).size(), t.value(b).size(), "add");
  RealVector y = t.value(a) + t.value(b);
  return t.record("add", std::move(y), {a.id, b.id}, [a, b](Tape& tp, std::size_t self) {
    tp.accumulate(a.id, tp.grad_real(self));
    tp.accumulate(b.id, tp.grad_real(self));
  });
}

Cplx add(Tape& t, Cplx a, Cplx b) {
  require_same_size(t.value(a).size(), t.value(b).size(), "add");
  ComplexVector y = t.value(a) + t.value(b);
  return t.record("add", std::move(y), {a.id, b.id}, [a, b](Tape& tp, std::size_t self) {
    tp.accumulate(a.id, tp.grad_complex(self));
    tp.accumulate(b.id, tp.grad_complex(self));
  });
}

Real add_constant(Tape& t, Real x, const RealVector& c) {
  require_same_size(t.value(x).size(), c.size(), "add_constant");
  return t.record("add_constant", RealVector(t.value(x) + c), {x.id},
                  [x](Tape& tp, std::size_t self) { tp.accumulate(x.id, tp.grad_real(self)); });
}

Cplx add_constant(Tape& t, Cplx x, const ComplexVector& c) {
  require_same_size(t.value(x).size(), c.size(), "add_constant");
  return t.record("add_constant", ComplexVector(t.value(x) + c), {x.id},
                  [x](Tape& tp, std::size_t self) { tp.accumulate(x.id, tp.grad_complex(self)); });
}

Real affine(Tape& t, Real x, double scale, double offset) {
  RealVector y = (scale * t.value(x).array() + offset).matrix();
  return t.record("affine", std::move(y), {x.id}, [x, scale](Tape& tp, std::size_t self) {
    tp.accumulate(x.id, RealVector(scale * tp.grad_real(self)));
  });
}

Real mul_scalar(Tape& t, Real x, Real s) {
  require_scalar(t.value(s), "mul_scalar");
  RealVector y = t.value(s)[0] * t.value(x);
  return t.record("mul_scalar", std::move(y), {x.id, s.id}, [x, s](Tape& tp, std::size_t self) {
    const RealVector& g = tp.grad_real(self);
    if (tp.needs(x.id)) tp.accumulate(x.id, RealVector(tp.value_real(s.id)[0] * g));
    if (tp.needs(s.id)) tp.accumulate(s.id, RealVector(RealVector::Constant(1, g.dot(tp.value_real(x.id)))));
  });
}

Real add_scalar(Tape& t, Real x, Real b) {
  require_scalar(t.value(b), "add_scalar");
  RealVector y = (t.value(x).array() + t.value(b)[0]).matrix();
  return t.record("add_scalar", std::move(y), {x.id, b.id}, [x, b](Tape& tp, std::size_t self) {
    const RealVector& g = tp.grad_real(self);
    tp.accumulate(x.id, g);
    if (tp.needs(b.id)) tp.accumulate(b.id, RealVector(RealVector::Constant(1, g.sum())));
  });
}

Real clip(Tape& t, Real x, double lo, double hi) {
  RealVector y = t.value(x).cwiseMax(lo).cwiseMin(hi);
  return t.record("clip", std::move(y), {x.id}, [x, lo, hi](Tape& tp, std::size_t self) {
    const RealVector& v = tp.value_real(x.id);
    const RealVector mask = ((v.array() >= lo) && (v.array() <= hi)).cast<double>();
    tp.accumulate(x.id, RealVector(tp.grad_real(self).cwiseProduct(mask)));
  });
}

Real fir(Tape& t, Real x, Real taps) {
  RealVector y = dsp::fir_same(t.value(x), t.value(taps));
  return t.record("fir", std::move(y), {x.id, taps.id}, [x, taps](Tape& tp, std::size_t self) {
    const RealVector& g = tp.grad_real(self);
    const RealVector& h = tp.value_real(taps.id);
    if (tp.needs(x.id)) tp.accumulate(x.id, dsp::fir_same_adjoint_input(g, h));
    if (tp.needs(taps.id)) tp.accumulate(taps.id, dsp::fir_same_adjoint_taps(g, tp.value_real(x.id), h.size()));
  });
}

Real downsample(Tape& t, Real x, int factor, int offset) {
  RealVector y = dsp::downsample(t.value(x), factor, offset);
  const Eigen::Index n = t.value(x).size();
  return t.record("downsample", std::move(y), {x.id}, [x, factor, offset, n](Tape& tp, std::size_t self) {
    const RealVector& g = tp.grad_real(self);
    RealVector gx = RealVector::Zero(n);
    for (Eigen::Index k = 0; k < g.size(); ++k) gx[k * factor + offset] = g[k];
    tp.accumulate(x.id, gx);
  });
}

Real slice(Tape& t, Real x, Eigen::Index start, Eigen::Index length) {
  const Eigen::Index n = t.value(x).size();
  if (start < 0 || length < 0 || start + length > n) throw ContractError("slice: range out of bounds");
  RealVector y = t.value(x).segment(start, length);
  return t.record("slice", std::move(y), {x.id}, [x, start, n](Tape& tp, std::size_t self) {
    const RealVector& g = tp.grad_real(self);
    RealVector gx = RealVector::Zero(n);
    gx.segment(start, g.size()) = g;
    tp.accumulate(x.id, gx);
  });
}

Real filter(Tape& t, Real x, const ComplexVector& response) {
  RealVector y = dsp::apply_response(t.value(x), response);
  return t.record("filter", std::move(y), {x.id}, [x, response](Tape& tp, std::size_t self) {
    tp.accumulate(x.id, dsp::apply_response(tp.grad_real(self), ComplexVector(response.conjugate())));
  });
}

Cplx filter(Tape& t, Cplx x, const ComplexVector& response) {
  ComplexVector y = dsp::apply_response(t.value(x), response);
  return t.record("filter", std::move(y), {x.id}, [x, response](Tape& tp, std::size_t self) {
    tp.accumulate(x.id, dsp::apply_response(tp.grad_complex(self), ComplexVector(response.conjugate())));
  });
}

Cplx modulate(Tape& t, Cplx x, const ComplexVector& waveform) {
  require_same_size(t.value(x).size(), waveform.size(), "modulate");
  ComplexVector y = t.value(x).cwiseProduct(waveform);
  return t.record("modulate", std::move(y), {x.id}, [x, waveform](Tape& tp, std::size_t self) {
    tp.accumulate(x.id, ComplexVector(tp.grad_complex(self).cwiseProduct(waveform.conjugate())));
  });
}

Cplx to_complex(Tape& t, Real x) {
  ComplexVector y = t.value(x).cast<Complex>();
  return t.record("to_complex", std::move(y), {x.id}, [x](Tape& tp, std::size_t self) {
    tp.accumulate(x.id, RealVector(tp.grad_complex(self).real()));
  });
}

Real real_part(Tape& t, Cplx x) {
  RealVector y = t.value(x).real();
  return t.record("real_part", std::move(y), {x.id}, [x](Tape& tp, std::size_t self) {
    tp.accumulate(x.id, ComplexVector(tp.grad_real(self).cast<Complex>()));
  });
}

Real abs2(Tape& t, Cplx x, double scale) {
  RealVector y = scale * t.value(x).cwiseAbs2();
  return t.record("abs2", std::move(y), {x.id}, [x, scale](Tape& tp, std::size_t self) {
    const RealVector& g = tp.grad_real(self);
    ComplexVector gx = (2.0 * scale) * tp.value_complex(x.id).cwiseProduct(g.cast<Complex>());
    tp.accumulate(x.id, gx);
  });
}

Real remove_mean(Tape& t, Real x) {
  RealVector y = (t.value(x).array() - t.value(x).mean()).matrix();
  return t.record("remove_mean", std::move(y), {x.id}, [x](Tape& tp, std::size_t self) {
    const RealVector& g = tp.grad_real(self);
    tp.accumulate(x.id, RealVector((g.array() - g.mean()).matrix()));
  });
}

Real power_normalize(Tape& t, Real x, double target_power) {
  const RealVector& v = t.value(x);
  const double n = static_cast<double>(v.size());
  const double p = v.squaredNorm() / n;
  if (!(p > 0.0)) throw ContractError("power_normalize: zero-power input");
  const double gain = std::sqrt(target_power / p);
  return t.record("power_normalize", RealVector(gain * v), {x.id}, [x, gain, p, n](Tape& tp, std::size_t self) {
    const RealVector& g = tp.grad_real(self);
    const RealVector& xv = tp.value_real(x.id);
    const double proj = g.dot(xv) / (n * p);
    tp.accumulate(x.id, RealVector(gain * (g - proj * xv)));
  });
}

Real dot(Tape& t, Real a, Real b) {
  require_same_size(t.value(a).size(), t.value(b).size(), "dot");
  const double y = t.value(a).dot(t.value(b));
  return t.record("dot", RealVector(RealVector::Constant(1, y)), {a.id, b.id}, [a, b](Tape& tp, std::size_t self) {
    const double g = tp.grad_real(self)[0];
    const RealVector ga = g * tp.value_real(b.id);
    const RealVector gb = g * tp.value_real(a.id);
    tp.accumulate(a.id, ga);
    tp.accumulate(b.id, gb);
  });
}

Real mse(Tape& t, Real estimate, const RealVector& target) {
  const RealVector& e = t.value(estimate);
  require_same_size(e.size(), target.size(), "mse");
  if (e.size() == 0) throw ContractError("mse: empty batch");
  const double n = static_cast<double>(e.size());
  const double loss = (e - target).squaredNorm() / n;
  return t.record("mse", RealVector(RealVector::Constant(1, loss)), {estimate.id},
                  [estimate, target, n](Tape& tp, std::size_t self) {
                    const double g = tp.grad_real(self)[0];
                    tp.accumulate(estimate.id, RealVector((2.0 * g / n) * (tp.value_real(estimate.id) - target)));
                  });
}

Real untracked(Tape& t, Real x, const std::function<RealVector(const RealVector&)>& fn) {
  return t.constant(fn(t.value(x)), "untracked");
}

Cplx untracked(Tape& t, Cplx x, const std::function<ComplexVector(const ComplexVector&)>& fn) {
  return t.constant(fn(t.value(x)), "untracked");
}

}  // namespace e2e::ad
