#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "e2e/harness/experiment.hpp"
#include "e2e/metrics/metrics.hpp"

namespace fs = std::filesystem;
using namespace e2e;

namespace {

struct Common {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment file (YAML)");
  cmd->add_option("--preset", c.preset, "shipped preset name");
  cmd->add_option("--seed", c.seed, "master seed override");
  cmd->add_option("--jobs", c.jobs, "parallel simulations")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "output path");
}

harness::ExperimentSpec load_spec(const Common& c, const std::string& fallback_preset = {}) {
  if (!c.config.empty() && !c.preset.empty()) throw ConfigError("give either --config or --preset, not both");
  fs::path path;
  if (!c.config.empty()) {
    path = c.config;
  } else if (!c.preset.empty()) {
    path = harness::preset_path(c.preset);
  } else if (!fallback_preset.empty()) {
    path = harness::preset_path(fallback_preset);
  } else {
    throw ConfigError("missing --config or --preset");
  }
  harness::ExperimentSpec spec = harness::load_experiment(path);
  if (c.seed) spec.master_seed = *c.seed;
  return spec;
}

fs::path output_or(const Common& c, const fs::path& fallback) { return c.out.empty() ? fallback : fs::path(c.out); }

int run_sweep(const Common& c, const std::string& log_dir, const std::string& fallback_preset) {
  const harness::ExperimentSpec spec = load_spec(c, fallback_preset);
  harness::RunOptions opt;
  opt.jobs = c.jobs;
  if (!log_dir.empty()) opt.log_dir = fs::path(log_dir);
  const harness::SweepResult result = harness::run_experiment(spec, opt);
  const fs::path out = output_or(c, spec.output.empty() ? fs::path(spec.name + ".csv") : spec.output);
  harness::serialize_results(result, out);
  fs::path script = out;
  script.replace_extension(".gp");
  harness::write_gnuplot_script(spec, out, script);
  std::printf("%zu rows -> %s (plot: gnuplot -p %s)\n", result.rows.size(), out.string().c_str(),
              script.string().c_str());
  for (const auto& r : result.rows) {
    std::printf("  %-12s N=%-3ld L=%-4g %s=%-8g seed=%d  SER %.3e [%.2e, %.2e]%s\n", r.variant.c_str(),
                static_cast<long>(r.n_taps), r.fiber_km, r.sweep_var_name.c_str(), r.sweep_value, r.seed, r.ser,
                r.ser_ci_lo, r.ser_ci_hi, r.trained_at.rfind("aborted", 0) == 0 ? "  (aborted)" : "");
  }
  return 0;
}

/// Link configuration at which `train` and the diagnostics operate.
link::LinkConfig operating_link(const harness::ExperimentSpec& spec, bool for_training) {
  link::LinkConfig cfg = spec.link;
  if (spec.sweep == harness::SweepVariable::launch_power_dbm) {
    if (for_training && spec.train_link) cfg = *spec.train_link;
  } else {
    cfg = harness::at_point(cfg, spec.sweep, spec.sweep_values.front());
  }
  cfg.fiber_km = spec.fiber_km.front();
  return cfg;
}

double operating_snr(const harness::ExperimentSpec& spec, bool for_training) {
  if (for_training) return spec.training.train_snr_db;
  return spec.sweep == harness::SweepVariable::snr_db ? spec.sweep_values.front() : spec.eval_snr_db;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint pulse-shaper and receiver filter optimization for band-limited links"};
  app.require_subcommand(1);

  Common c_train, c_eval, c_sweep, c_robust, c_isi, c_eye;
  std::string variant_name;
  long taps = 0;
  std::string params_path;
  std::string log_dir;
  long traces = 200;

  auto* train_cmd = app.add_subcommand("train", "train one variant and save its parameters");
  add_common(train_cmd, c_train);
  train_cmd->add_option("--variant", variant_name, "variant (default: first in the experiment)");
  train_cmd->add_option("--taps", taps, "filter length (default: first in the experiment)");

  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate saved parameters over the experiment grid");
  add_common(eval_cmd, c_eval);
  eval_cmd->add_option("--params", params_path, "parameter file")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "run a full experiment");
  add_common(sweep_cmd, c_sweep);
  sweep_cmd->add_option("--log-dir", log_dir, "write per-run training logs here");

  auto* robust_cmd = app.add_subcommand("robustness", "launch-power robustness experiment");
  add_common(robust_cmd, c_robust);
  robust_cmd->add_option("--log-dir", log_dir, "write per-run training logs here");

  auto* isi_cmd = app.add_subcommand("isi-metric", "folded spectrum B(f) and its flatness");
  add_common(isi_cmd, c_isi);
  isi_cmd->add_option("--params", params_path, "parameter file (default: RRC pair)");
  isi_cmd->add_option("--taps", taps, "RRC length when no parameter file is given");

  auto* eye_cmd = app.add_subcommand("eye", "eye diagram before downsampling");
  add_common(eye_cmd, c_eye);
  eye_cmd->add_option("--params", params_path, "parameter file")->required();
  eye_cmd->add_option("--traces", traces, "number of traces")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      const harness::ExperimentSpec spec = load_spec(c_train);
      train::TrainPlan plan;
      plan.variant = variant_name.empty() ? spec.variants.front() : train::parse_variant(variant_name);
      plan.n_taps = taps > 0 ? taps : spec.n_taps.front();
      plan.hyper = spec.training;
      plan.seed = harness::seed_derive(spec.master_seed, train::to_string(plan.variant), -1, spec.seeds.front());
      const link::LinkConfig cfg = operating_link(spec, true);
      const train::TrainResult r = train::train(plan, cfg);
      const fs::path out = output_or(c_train, "params.json");
      harness::save_parameters({plan.variant, harness::config_hash(spec), r.delay_samples, r.params}, out);
      fs::path log = out;
      log.replace_extension(".log.csv");
      harness::write_train_log(r.log, log);
      std::printf("%s N=%ld: loss %.4e -> %.4e over %zu batches; parameters -> %s, log -> %s\n",
                  std::string(train::to_string(plan.variant)).c_str(), static_cast<long>(plan.n_taps),
                  r.log.front().loss, r.log.back().loss, r.log.size(), out.string().c_str(), log.string().c_str());
      return 0;
    }
    if (*eval_cmd) {
      const harness::ExperimentSpec spec = load_spec(c_eval);
      const harness::ParameterFile pf = harness::load_parameters(params_path);
      harness::SweepResult result;
      const std::string hash = harness::config_hash(spec);
      for (int repeat : spec.seeds) {
        for (std::size_t p = 0; p < spec.sweep_values.size(); ++p) {
          const double v = spec.sweep_values[p];
          link::LinkConfig cfg = harness::at_point(spec.link, spec.sweep, v);
          cfg.fiber_km = spec.fiber_km.front();
          const double snr = spec.sweep == harness::SweepVariable::snr_db ? v : spec.eval_snr_db;
          const auto s = train::evaluate_ser(pf.params, cfg, spec.evaluation, snr,
                                             harness::seed_derive(spec.master_seed, "eval", static_cast<long>(p), repeat));
          result.rows.push_back({std::string(harness::to_string(spec.sweep)), v,
                                 std::string(train::to_string(pf.variant)), pf.params.h_p.size(), cfg.fiber_km, repeat,
                                 s.rate, s.ci_lo, s.ci_hi, "params:" + fs::path(params_path).filename().string(), hash});
          std::printf("%s=%g seed=%d  SER %.3e [%.2e, %.2e] over %zu symbols\n",
                      std::string(harness::to_string(spec.sweep)).c_str(), v, repeat, s.rate, s.ci_lo, s.ci_hi,
                      s.symbols);
        }
      }
      const fs::path out = output_or(c_eval, "evaluation.csv");
      harness::serialize_results(result, out);
      return 0;
    }
    if (*sweep_cmd) return run_sweep(c_sweep, log_dir, {});
    if (*robust_cmd) {
      const harness::ExperimentSpec spec = load_spec(c_robust, "robustness-desk");
      if (spec.sweep != harness::SweepVariable::launch_power_dbm) {
        throw ConfigError("robustness needs a launch_power_dbm sweep");
      }
      Common c = c_robust;
      if (c.config.empty() && c.preset.empty()) c.preset = "robustness-desk";
      return run_sweep(c, log_dir, {});
    }
    if (*isi_cmd) {
      const harness::ExperimentSpec spec = load_spec(c_isi);
      const link::LinkConfig cfg = operating_link(spec, false);
      train::SystemParameters params;
      if (!params_path.empty()) {
        params = harness::load_parameters(params_path).params;
      } else {
        train::TrainPlan plan;
        plan.n_taps = taps > 0 ? taps : spec.n_taps.front();
        plan.variant = train::Variant::PS_RxF;
        params = train::initial_parameters(plan, cfg);
      }
      const RealVector* ffe = params.ffe ? &params.ffe->coeffs : nullptr;
      const metrics::IsiMetric m = metrics::nyquist_isi_metric(params.h_p.coeffs, params.h_r.coeffs, cfg, ffe);
      Eigen::MatrixXd table(m.folded.size(), 2);
      table.col(0) = m.frequency_hz / 1e9;
      table.col(1) = m.folded;
      const fs::path out = output_or(c_isi, "isi_metric.csv");
      harness::write_matrix_csv(table, {"frequency_ghz", "folded_response"}, out);
      std::printf("flatness %.6e -> %s\n", m.flatness, out.string().c_str());
      return 0;
    }
    if (*eye_cmd) {
      const harness::ExperimentSpec spec = load_spec(c_eye);
      const link::LinkConfig cfg = operating_link(spec, false);
      const harness::ParameterFile pf = harness::load_parameters(params_path);
      const auto block = train::evaluate_block(pf.params, cfg, 2 * traces + 2, operating_snr(spec, false),
                                               harness::seed_derive(spec.master_seed, "eye", 0, 0));
      const RealVector scaled = (block.output.oversampled.array() - block.output.dc) * block.output.gain;
      const auto eye = metrics::eye_diagram(scaled, cfg.sps, block.output.first_sample + cfg.sps, traces);
      const RealVector at_phase = eye.col(cfg.sps);
      const RealVector sent = block.batch.target().segment(1, traces);
      const double opening = metrics::eye_opening(at_phase, sent, Constellation::pam(cfg.pam_order));
      const fs::path out = output_or(c_eye, "eye.csv");
      harness::write_matrix_csv(eye, {}, out);
      std::printf("eye opening %.4f (%ld traces) -> %s\n", opening, traces, out.string().c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
