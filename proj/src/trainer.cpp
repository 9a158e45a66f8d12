#include "e2e/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "e2e/ad/ops.hpp"
#include "e2e/dsp/fir.hpp"
#include "e2e/dsp/level.hpp"
#include "e2e/dsp/pulse.hpp"
#include "e2e/seed.hpp"

namespace e2e::train {

using link::LinkConfig;

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::PS:
      return "PS";
    case Variant::RxF:
      return "RxF";
    case Variant::PS_RxF:
      return "PS_RxF";
    case Variant::RRC_FFE:
      return "RRC_FFE";
    case Variant::RRC_Volterra:
      return "RRC_Volterra";
    case Variant::PS_Volterra:
      return "PS_Volterra";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::PS, Variant::RxF, Variant::PS_RxF, Variant::RRC_FFE, Variant::RRC_Volterra,
                    Variant::PS_Volterra}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + std::string(name) + "'");
}

std::vector<std::string> trainable_set(Variant variant, const LinkConfig& cfg) {
  std::vector<std::string> out;
  switch (variant) {
    case Variant::PS:
      out = {"h_p"};
      break;
    case Variant::RxF:
      out = {"h_r"};
      break;
    case Variant::PS_RxF:
      out = {"h_p", "h_r"};
      break;
    case Variant::RRC_FFE:
      out = {"ffe"};
      break;
    case Variant::RRC_Volterra:
      out = {"volterra_k1", "volterra_k2"};
      break;
    case Variant::PS_Volterra:
      out = {"h_p", "volterra_k1", "volterra_k2"};
      break;
  }
  if (cfg.is_imdd()) out.emplace_back("g_dac");
  if (cfg.kind == link::LinkKind::imdd_eam) out.emplace_back("v_b");
  return out;
}

SystemParameters initial_parameters(const TrainPlan& plan, const LinkConfig& cfg) {
  cfg.validate();
  if (plan.n_taps < 1 || plan.n_taps % 2 == 0) throw ConfigError("n_taps must be odd and positive");
  SystemParameters p;
  p.h_p = dsp::rrc_init(cfg.sps, plan.n_taps, cfg.rrc_rolloff, cfg.rrc_span);
  p.h_r = p.h_p;
  if (plan.variant == Variant::RRC_FFE) p.ffe = FilterTaps::impulse(plan.n_taps, cfg.sps);
  if (plan.variant == Variant::RRC_Volterra || plan.variant == Variant::PS_Volterra) {
    p.volterra = eq::VolterraKernel::identity(plan.hyper.volterra_n1, plan.hyper.volterra_n2);
  }
  if (cfg.is_imdd()) {
    const RealVector symbols = link::draw_pam_symbols(cfg.pam_order, 20000, combine_seed(plan.seed, 0x9a1));
    const RealSignal shaped = dsp::fir_convolve(dsp::upsample(symbols, cfg.sps, cfg.symbol_rate_hz), p.h_p);
    std::vector<double> mag(shaped.samples.data(), shaped.samples.data() + shaped.size());
    for (double& m : mag) m = std::abs(m);
    const auto k = static_cast<std::ptrdiff_t>(0.999 * static_cast<double>(mag.size() - 1));
    std::nth_element(mag.begin(), mag.begin() + k, mag.end());
    p.g_dac = 0.5 / mag[static_cast<std::size_t>(k)];
    p.v_b = cfg.kind == link::LinkKind::imdd_eam ? -1.0 : 0.5 * cfg.v_pp;
  }
  return p;
}

link::ChainParams bind_parameters(ad::Tape& t, const SystemParameters& params,
                                  std::span<const std::string> trainable, ParameterSlots* slots) {
  const auto learn = [&](std::string_view name) {
    return slots != nullptr && std::find(trainable.begin(), trainable.end(), name) != trainable.end();
  };
  const auto bind = [&](std::string_view name, ad::GradSlot* slot, const RealVector& value) {
    if (learn(name)) {
      *slot = ad::GradSlot(value, std::string(name));
      return t.parameter(*slot);
    }
    return t.constant(value, "frozen");
  };
  link::ChainParams c;
  c.h_p = bind("h_p", slots ? &slots->h_p : nullptr, params.h_p.coeffs);
  c.h_r = bind("h_r", slots ? &slots->h_r : nullptr, params.h_r.coeffs);
  if (params.ffe) c.ffe = bind("ffe", slots ? &slots->ffe : nullptr, params.ffe->coeffs);
  if (params.volterra) {
    c.volterra_k1 = bind("volterra_k1", slots ? &slots->k1 : nullptr, params.volterra->k1);
    c.volterra_k2 = bind("volterra_k2", slots ? &slots->k2 : nullptr, params.volterra->k2);
    c.volterra_n2 = params.volterra->n2;
  }
  c.g_dac = bind("g_dac", slots ? &slots->g_dac : nullptr, RealVector::Constant(1, params.g_dac));
  c.v_b = bind("v_b", slots ? &slots->v_b : nullptr, RealVector::Constant(1, params.v_b));
  return c;
}

double mse_loss(const RealVector& x_hat, const RealVector& x) {
  if (x_hat.size() != x.size()) throw ContractError("mse_loss: length mismatch");
  if (x.size() == 0) throw ContractError("mse_loss: empty batch");
  return (x_hat - x).squaredNorm() / static_cast<double>(x.size());
}

double onecycle_lr(Eigen::Index step, Eigen::Index total_steps, double max_lr, double warmup_fraction,
                   double div_start, double div_final) {
  if (total_steps < 1 || step < 0 || step >= total_steps) throw ContractError("onecycle_lr: step out of range");
  const double start = max_lr / div_start;
  const double final = max_lr / div_final;
  const double s = static_cast<double>(step);
  const double warm = warmup_fraction * static_cast<double>(total_steps);
  if (s < warm) return start + (max_lr - start) * 0.5 * (1.0 - std::cos(std::numbers::pi * s / warm));
  const double span = static_cast<double>(total_steps - 1) - warm;
  const double frac = span > 0.0 ? std::min(1.0, (s - warm) / span) : 1.0;
  return final + (max_lr - final) * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

double clip_grad_norm(std::span<RealVector* const> grads, double max_norm) {
  if (!(max_norm > 0.0)) throw ContractError("clip_grad_norm: max_norm must be positive");
  double sq = 0.0;
  for (const RealVector* g : grads) sq += g->squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (RealVector* g : grads) *g *= s;
  }
  return norm;
}

void adam_update(AdamState& st, RealVector& param, const RealVector& grad, double lr) {
  if (grad.size() != param.size()) throw ContractError("adam_update: gradient shape mismatch");
  if (st.m.size() != param.size()) {
    st.m = RealVector::Zero(param.size());
    st.v = RealVector::Zero(param.size());
  }
  ++st.step;
  st.m = st.beta1 * st.m + (1.0 - st.beta1) * grad;
  st.v = st.beta2 * st.v + (1.0 - st.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  param.array() -= lr * (st.m.array() / c1) / ((st.v.array() / c2).sqrt() + st.eps);
}

namespace {

Eigen::Index total_taps(const SystemParameters& p) {
  Eigen::Index n = p.h_p.size() + p.h_r.size();
  if (p.ffe) n += p.ffe->size();
  if (p.volterra) n += std::max(p.volterra->n1(), p.volterra->n2);
  return n;
}

struct Group {
  std::string name;
  ad::GradSlot* slot;
  bool filter;  // unit-norm projected
  bool scalar_lr;
};

}  // namespace

TrainResult train(const TrainPlan& plan, const LinkConfig& cfg) {
  return train_from(initial_parameters(plan, cfg), plan, cfg);
}

TrainResult train_from(SystemParameters params, const TrainPlan& plan, const LinkConfig& cfg) {
  cfg.validate();
  const TrainingHyper& h = plan.hyper;
  if (h.batch_size < 1 || h.n_symbols < h.batch_size) throw ConfigError("training needs at least one full batch");
  if (cfg.fiber_km > 0.0 && cfg.fiber_model == link::FiberModel::ssfm) {
    throw ConfigError("training requires the linear fiber model");
  }
  const std::vector<std::string> trainable = trainable_set(plan.variant, cfg);
  const Eigen::Index n_batches = h.n_symbols / h.batch_size;
  const Eigen::Index guard = link::guard_symbols(cfg, total_taps(params));

  std::mt19937_64 symbol_rng(combine_seed(plan.seed, 1));
  link::RandomNoise noise(combine_seed(plan.seed, 2));

  ParameterSlots slots;
  std::vector<AdamState> adam(trainable.size());
  for (AdamState& a : adam) {
    a.beta1 = h.beta1;
    a.beta2 = h.beta2;
    a.eps = h.eps;
  }

  TrainResult result;
  result.delay_samples = link::alignment_delay_samples(cfg);
  double initial_loss = 0.0;
  int diverging = 0;

  for (Eigen::Index b = 0; b < n_batches; ++b) {
    ad::Tape tape;
    const link::ChainParams cp = bind_parameters(tape, params, trainable, &slots);
    const link::Batch batch = link::draw_batch(cfg, h.batch_size, guard, symbol_rng);
    link::ChainOutput out = link::link_forward(tape, cfg, cp, batch, h.train_snr_db, noise, link::Mode::train);
    result.diagnostics.negative_voltage_clamps += out.diagnostics.negative_voltage_clamps;
    result.diagnostics.absorption_clamps += out.diagnostics.absorption_clamps;
    const ad::Real loss = ad::mse(tape, out.soft, batch.target());
    const double loss_value = tape.value(loss)[0];
    if (!std::isfinite(loss_value)) {
      throw TrainingAborted("non-finite loss at batch " + std::to_string(b), std::move(result.log));
    }
    if (b == 0) initial_loss = loss_value;
    diverging = loss_value > 10.0 * initial_loss ? diverging + 1 : 0;
    if (diverging >= 100) {
      throw TrainingAborted("loss diverged at batch " + std::to_string(b), std::move(result.log));
    }
    tape.backward(loss);

    std::vector<Group> groups;
    for (const std::string& name : trainable) {
      if (name == "h_p") groups.push_back({name, &slots.h_p, true, false});
      if (name == "h_r") groups.push_back({name, &slots.h_r, true, false});
      if (name == "ffe") groups.push_back({name, &slots.ffe, true, false});
      if (name == "volterra_k1") groups.push_back({name, &slots.k1, false, false});
      if (name == "volterra_k2") groups.push_back({name, &slots.k2, false, false});
      if (name == "g_dac") groups.push_back({name, &slots.g_dac, false, true});
      if (name == "v_b") groups.push_back({name, &slots.v_b, false, true});
    }
    std::vector<RealVector*> grads;
    for (Group& g : groups) grads.push_back(&g.slot->grad);
    const double grad_norm = clip_grad_norm(grads, h.clip_norm);
    const double lr = onecycle_lr(b, n_batches, h.lr_filters, h.warmup_fraction, h.div_start, h.div_final);
    const double lr_scalar = onecycle_lr(b, n_batches, h.lr_scalars, h.warmup_fraction, h.div_start, h.div_final);
    for (std::size_t k = 0; k < groups.size(); ++k) {
      ad::GradSlot& s = *groups[k].slot;
      adam_update(adam[k], s.value, s.grad, groups[k].scalar_lr ? lr_scalar : lr);
      if (groups[k].filter) {
        const double norm = s.value.norm();
        if (!(norm > 0.0)) throw TrainingAborted("filter collapsed to zero", std::move(result.log));
        s.value /= norm;
      }
    }
    for (const Group& g : groups) {
      const RealVector& v = g.slot->value;
      if (g.name == "h_p") params.h_p.coeffs = v;
      if (g.name == "h_r") params.h_r.coeffs = v;
      if (g.name == "ffe") params.ffe->coeffs = v;
      if (g.name == "volterra_k1") params.volterra->k1 = v;
      if (g.name == "volterra_k2") params.volterra->k2 = v;
      if (g.name == "g_dac") params.g_dac = v[0];
      if (g.name == "v_b") params.v_b = v[0];
    }
    result.log.push_back({b, lr, loss_value, grad_norm});
  }
  result.params = std::move(params);
  return result;
}

namespace {

EvalBlock run_block(const SystemParameters& params, const LinkConfig& cfg, Eigen::Index n_symbols, double snr_db,
                    std::mt19937_64& rng, link::NoiseSource& noise) {
  ad::Tape tape(false);
  const link::ChainParams cp = bind_parameters(tape, params, {}, nullptr);
  EvalBlock block;
  block.batch = link::draw_batch(cfg, n_symbols, link::guard_symbols(cfg, total_taps(params)), rng);
  block.output = link::link_forward(tape, cfg, cp, block.batch, snr_db, noise, link::Mode::eval);
  block.soft = tape.value(block.output.soft);
  return block;
}

}  // namespace

metrics::SerEstimate evaluate_ser(const SystemParameters& params, const LinkConfig& cfg, const EvalPlan& plan,
                                  double snr_db, std::uint64_t seed, link::LinkDiagnostics* diag) {
  cfg.validate();
  if (plan.block_symbols < 1 || plan.max_symbols < plan.block_symbols) throw ConfigError("bad evaluation plan");
  std::mt19937_64 rng(combine_seed(seed, 1));
  link::RandomNoise noise(combine_seed(seed, 2));
  const Constellation constellation = Constellation::pam(cfg.pam_order);
  std::size_t errors = 0;
  Eigen::Index symbols = 0;
  while (symbols + plan.block_symbols <= plan.max_symbols) {
    const EvalBlock block = run_block(params, cfg, plan.block_symbols, snr_db, rng, noise);
    if (diag != nullptr) {
      diag->negative_voltage_clamps += block.output.diagnostics.negative_voltage_clamps;
      diag->absorption_clamps += block.output.diagnostics.absorption_clamps;
    }
    const RealVector decided = metrics::decide(block.soft, constellation);
    errors += static_cast<std::size_t>((decided.array() != block.batch.target().array()).count());
    symbols += plan.block_symbols;
    if (errors >= plan.min_errors && symbols >= plan.min_symbols) break;
  }
  return metrics::wilson(errors, static_cast<std::size_t>(symbols));
}

EvalBlock evaluate_block(const SystemParameters& params, const LinkConfig& cfg, Eigen::Index n_symbols,
                         double snr_db, std::uint64_t seed) {
  std::mt19937_64 rng(combine_seed(seed, 1));
  link::RandomNoise noise(combine_seed(seed, 2));
  return run_block(params, cfg, n_symbols, snr_db, rng, noise);
}

}  // namespace e2e::train
