#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "e2e/eq/equalizers.hpp"
#include "e2e/link/chain.hpp"
#include "e2e/metrics/metrics.hpp"

namespace e2e::train {

enum class Variant { PS, RxF, PS_RxF, RRC_FFE, RRC_Volterra, PS_Volterra };

std::string_view to_string(Variant v);
/// Accepts the enumerator names, e.g. "PS_RxF".
Variant parse_variant(std::string_view name);

struct TrainingHyper {
  Eigen::Index batch_size = 1000;
  Eigen::Index n_symbols = 100000;
  double lr_filters = 5e-3;
  double lr_scalars = 1e-2;
  double clip_norm = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double warmup_fraction = 0.3;
  double div_start = 25.0;
  double div_final = 1e4;
  Eigen::Index volterra_n1 = 101;
  Eigen::Index volterra_n2 = 45;
  /// SNR of the AWGN training channel; unused for IM/DD.
  double train_snr_db = 12.0;
};

struct TrainPlan {
  Variant variant = Variant::PS_RxF;
  Eigen::Index n_taps = 25;
  TrainingHyper hyper;
  std::uint64_t seed = 1;
};

/// Everything a trained DSP chain consists of.
struct SystemParameters {
  FilterTaps h_p;
  FilterTaps h_r;
  std::optional<FilterTaps> ffe;
  std::optional<eq::VolterraKernel> volterra;
  double g_dac = 1.0;
  double v_b = 0.0;
};

/// Names of the parameters a variant learns: subsets of
/// {h_p, h_r, ffe, volterra_k1, volterra_k2, g_dac, v_b}.
std::vector<std::string> trainable_set(Variant variant, const link::LinkConfig& cfg);

/// RRC filters, identity equalizers, g_dac mapping the 99.9th percentile of
/// the shaped signal to the clip edge, v_b = -1 V (EAM) or v_pp / 2.
SystemParameters initial_parameters(const TrainPlan& plan, const link::LinkConfig& cfg);

/// Binds parameters to a tape; names listed in `trainable` become tape
/// parameters bound to `slots` (which must outlive the tape pass).
struct ParameterSlots {
  ad::GradSlot h_p, h_r, ffe, k1, k2, g_dac, v_b;
};
link::ChainParams bind_parameters(ad::Tape& t, const SystemParameters& params,
                                  std::span<const std::string> trainable, ParameterSlots* slots);

/// Mean of squared differences.
double mse_loss(const RealVector& x_hat, const RealVector& x);

/// Cosine one-cycle schedule: max/div_start -> max over the warmup
/// fraction, then cosine to max/div_final at the last step.
double onecycle_lr(Eigen::Index step, Eigen::Index total_steps, double max_lr, double warmup_fraction = 0.3,
                   double div_start = 25.0, double div_final = 1e4);

/// Scales all gradients by max_norm / g when their global norm g exceeds
/// max_norm. Returns g.
double clip_grad_norm(std::span<RealVector* const> grads, double max_norm);

struct AdamState {
  RealVector m;
  RealVector v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam step on `param`.
void adam_update(AdamState& state, RealVector& param, const RealVector& grad, double lr);

struct TrainLogEntry {
  Eigen::Index batch = 0;
  double lr = 0.0;
  double loss = 0.0;
  double grad_norm = 0.0;
};

struct TrainResult {
  SystemParameters params;
  std::vector<TrainLogEntry> log;
  Eigen::Index delay_samples = 0;
  link::LinkDiagnostics diagnostics;
};

/// Raised on a NaN loss or a diverging run; carries the trace so far.
class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(const std::string& what, std::vector<TrainLogEntry> trace)
      : std::runtime_error(what), log(std::move(trace)) {}
  std::vector<TrainLogEntry> log;
};

TrainResult train(const TrainPlan& plan, const link::LinkConfig& cfg);

/// Same as train(), starting from given parameters.
TrainResult train_from(SystemParameters start, const TrainPlan& plan, const link::LinkConfig& cfg);

struct EvalPlan {
  Eigen::Index block_symbols = 10000;
  std::size_t min_errors = 100;
  Eigen::Index min_symbols = 20000;
  Eigen::Index max_symbols = 10'000'000;
};

/// Monte-Carlo SER in evaluation mode, block by block until min_errors (and
/// min_symbols) are reached or max_symbols is spent.
metrics::SerEstimate evaluate_ser(const SystemParameters& params, const link::LinkConfig& cfg, const EvalPlan& plan,
                                  double snr_db, std::uint64_t seed, link::LinkDiagnostics* diag = nullptr);

struct EvalBlock {
  link::Batch batch;
  link::ChainOutput output;
  RealVector soft;
};

/// One evaluation-mode block, for eye diagrams and inspection.
EvalBlock evaluate_block(const SystemParameters& params, const link::LinkConfig& cfg, Eigen::Index n_symbols,
                         double snr_db, std::uint64_t seed);

}  // namespace e2e::train
