#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "e2e/train/trainer.hpp"

namespace YAML {
class Node;
}

namespace e2e::harness {

enum class SweepVariable { snr_db, v_pp, spacing_ghz, launch_power_dbm };

std::string_view to_string(SweepVariable v);
SweepVariable parse_sweep_variable(std::string_view name);

struct ExperimentSpec {
  std::string name;
  link::LinkConfig link;
  SweepVariable sweep = SweepVariable::snr_db;
  std::vector<double> sweep_values;
  std::vector<train::Variant> variants;
  std::vector<Eigen::Index> n_taps;
  std::vector<double> fiber_km{0.0};
  std::vector<int> seeds{0};
  std::uint64_t master_seed = 1;
  train::TrainingHyper training;
  train::EvalPlan evaluation;
  /// SNR for AWGN evaluation when SNR is not the sweep variable.
  double eval_snr_db = 12.0;
  /// Launch-power study: link used for training (the experiment link is
  /// used for evaluation).
  std::optional<link::LinkConfig> train_link;
  std::filesystem::path output;

  /// Throws ConfigError on empty grids or inconsistent settings.
  void validate() const;
};

/// Parses an experiment file. Relative paths resolve against base_dir.
ExperimentSpec parse_experiment(const YAML::Node& root, const std::filesystem::path& base_dir);
ExperimentSpec load_experiment(const std::filesystem::path& path);

/// Path of a shipped preset by name, e.g. "fig6-desk".
std::filesystem::path preset_path(const std::string& name);
std::vector<std::string> preset_names();

struct ResultRow {
  std::string sweep_var_name;
  double sweep_value = 0.0;
  std::string variant;
  Eigen::Index n_taps = 0;
  double fiber_km = 0.0;
  int seed = 0;
  double ser = 0.0;
  double ser_ci_lo = 0.0;
  double ser_ci_hi = 0.0;
  std::string trained_at;
  std::string config_hash;
};

struct SweepResult {
  std::vector<ResultRow> rows;
};

/// The fixed CSV header.
const std::vector<std::string>& result_columns();

/// Counter-mode hash of (master, variant, sweep index, repeat).
std::uint64_t seed_derive(std::uint64_t master_seed, std::string_view variant, std::int64_t sweep_index,
                          std::int64_t repeat_index);

/// FNV-1a of the canonical experiment description, as 16 hex digits.
std::string config_hash(const ExperimentSpec& spec);

/// Link configuration at one sweep point.
link::LinkConfig at_point(link::LinkConfig cfg, SweepVariable var, double value);

struct RunOptions {
  int jobs = 1;
  /// Optional per-run training log directory.
  std::optional<std::filesystem::path> log_dir;
};

/// Runs every (variant, n_taps, fiber, seed, sweep point) combination.
/// AWGN SNR sweeps train once at the training SNR; launch-power sweeps train
/// once on the training link; all other sweeps train per point. Rows come
/// back sorted by (variant, n_taps, fiber_km, sweep_value, seed).
SweepResult run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// RFC 4180 CSV, CRLF line ends, floats as %.8e.
void serialize_results(const SweepResult& result, const std::filesystem::path& path);
SweepResult read_results(const std::filesystem::path& path);

void write_train_log(const std::vector<train::TrainLogEntry>& log, const std::filesystem::path& path);

/// Versioned JSON parameter file.
struct ParameterFile {
  train::Variant variant = train::Variant::PS_RxF;
  std::string config_hash;
  Eigen::Index delay_samples = 0;
  train::SystemParameters params;
};
void save_parameters(const ParameterFile& file, const std::filesystem::path& path);
ParameterFile load_parameters(const std::filesystem::path& path);

/// gnuplot script plotting SER against the sweep value per variant.
void write_gnuplot_script(const ExperimentSpec& spec, const std::filesystem::path& csv_path,
                          const std::filesystem::path& script_path);

/// Matrix export, one row per line.
void write_matrix_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& header,
                      const std::filesystem::path& path);

}  // namespace e2e::harness
