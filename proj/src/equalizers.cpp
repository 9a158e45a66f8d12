#include "e2e/eq/equalizers.hpp"

#include "e2e/dsp/fir.hpp"

namespace e2e::eq {

RealSignal ffe_apply(const RealSignal& signal, const FilterTaps& taps) { return dsp::fir_convolve(signal, taps); }

Eigen::Index param_count(Eigen::Index n1, Eigen::Index n2) {
  if (n1 < 0 || n2 < 0) throw ContractError("param_count: negative kernel size");
  return n1 + n2 * (n2 + 1) / 2;
}

VolterraKernel::VolterraKernel(RealVector first, RealVector second, Eigen::Index second_lags)
    : k1(std::move(first)), k2(std::move(second)), n2(second_lags) {
  if (n2 < 0 || k2.size() != n2 * (n2 + 1) / 2) throw ContractError("Volterra: packed k2 size mismatch");
}

Eigen::Index VolterraKernel::packed_index(Eigen::Index i, Eigen::Index j, Eigen::Index n2) {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= n2) throw ContractError("Volterra: lag out of range");
  // rows 0..i-1 hold n2, n2-1, ... entries
  return i * n2 - i * (i - 1) / 2 + (j - i);
}

VolterraKernel VolterraKernel::identity(Eigen::Index n1, Eigen::Index n2) {
  RealVector first = RealVector::Zero(n1);
  if (n1 > 0) first[(n1 - 1) / 2] = 1.0;
  return {std::move(first), RealVector::Zero(n2 * (n2 + 1) / 2), n2};
}

namespace {

RealVector pad(const RealVector& x, Eigen::Index n_lags) {
  RealVector p = RealVector::Zero(x.size() + std::max<Eigen::Index>(n_lags, 1) - 1);
  p.segment((n_lags - 1) / 2, x.size()) = x;
  return p;
}

RealVector quadratic_part(const RealVector& x, const RealVector& k2, Eigen::Index n2) {
  const Eigen::Index n = x.size();
  RealVector y = RealVector::Zero(n);
  if (n2 == 0) return y;
  const RealVector p = pad(x, n2);
  Eigen::Index q = 0;
  for (Eigen::Index i = 0; i < n2; ++i) {
    const auto xi = p.segment(n2 - 1 - i, n);
    for (Eigen::Index j = i; j < n2; ++j, ++q) {
      if (k2[q] != 0.0) y.array() += k2[q] * xi.array() * p.segment(n2 - 1 - j, n).array();
    }
  }
  return y;
}

}  // namespace

RealVector volterra2_apply(const RealVector& x, const VolterraKernel& kernel) {
  if (kernel.n1() > x.size() || kernel.n2 > x.size()) throw ContractError("Volterra: kernel longer than signal");
  RealVector y = kernel.n1() > 0 ? dsp::fir_same(x, kernel.k1) : RealVector(RealVector::Zero(x.size()));
  return y + quadratic_part(x, kernel.k2, kernel.n2);
}

ad::Real volterra2(ad::Tape& t, ad::Real x, ad::Real k1, ad::Real k2, Eigen::Index n2) {
  const RealVector& xv = t.value(x);
  const VolterraKernel kernel(t.value(k1), t.value(k2), n2);
  RealVector y = volterra2_apply(xv, kernel);
  return t.record("volterra2", std::move(y), {x.id, k1.id, k2.id}, [x, k1, k2, n2](ad::Tape& tp, std::size_t self) {
    const RealVector& g = tp.grad_real(self);
    const RealVector& xv = tp.value_real(x.id);
    const RealVector& h1 = tp.value_real(k1.id);
    const RealVector& h2 = tp.value_real(k2.id);
    const Eigen::Index n = xv.size();
    if (tp.needs(k1.id)) tp.accumulate(k1.id, dsp::fir_same_adjoint_taps(g, xv, h1.size()));
    const bool need_x = tp.needs(x.id);
    const bool need_k2 = tp.needs(k2.id);
    RealVector gx = need_x ? dsp::fir_same_adjoint_input(g, h1) : RealVector();
    if (n2 > 0 && (need_x || need_k2)) {
      const RealVector p = pad(xv, n2);
      RealVector gp = RealVector::Zero(p.size());
      RealVector gk2(h2.size());
      Eigen::Index q = 0;
      for (Eigen::Index i = 0; i < n2; ++i) {
        const Eigen::Index oi = n2 - 1 - i;
        const RealVector gxi = g.cwiseProduct(p.segment(oi, n));
        for (Eigen::Index j = i; j < n2; ++j, ++q) {
          const Eigen::Index oj = n2 - 1 - j;
          gk2[q] = gxi.dot(p.segment(oj, n));
          if (need_x && h2[q] != 0.0) {
            gp.segment(oj, n) += h2[q] * gxi;
            gp.segment(oi, n).array() += h2[q] * g.array() * p.segment(oj, n).array();
          }
        }
      }
      if (need_k2) tp.accumulate(k2.id, gk2);
      if (need_x) gx += gp.segment((n2 - 1) / 2, n);
    } else if (need_k2) {
      tp.accumulate(k2.id, RealVector(RealVector::Zero(h2.size())));
    }
    if (need_x) tp.accumulate(x.id, gx);
  });
}

}  // namespace e2e::eq
