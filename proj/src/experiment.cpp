#include "e2e/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "e2e/seed.hpp"

namespace e2e::harness {

namespace fs = std::filesystem;
using link::LinkConfig;

std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::snr_db:
      return "snr_db";
    case SweepVariable::v_pp:
      return "v_pp";
    case SweepVariable::spacing_ghz:
      return "spacing_ghz";
    case SweepVariable::launch_power_dbm:
      return "launch_power_dbm";
  }
  return "?";
}

SweepVariable parse_sweep_variable(std::string_view name) {
  for (SweepVariable v : {SweepVariable::snr_db, SweepVariable::v_pp, SweepVariable::spacing_ghz,
                          SweepVariable::launch_power_dbm}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown sweep variable '" + std::string(name) + "'");
}

void ExperimentSpec::validate() const {
  link.validate();
  if (sweep_values.empty()) throw ConfigError("sweep grid is empty");
  if (variants.empty()) throw ConfigError("variant list is empty");
  if (n_taps.empty()) throw ConfigError("n_taps list is empty");
  if (fiber_km.empty()) throw ConfigError("fiber length list is empty");
  if (seeds.empty()) throw ConfigError("seed list is empty");
  for (Eigen::Index n : n_taps) {
    if (n < 1 || n % 2 == 0) throw ConfigError("n_taps entries must be odd and positive");
  }
  for (double l : fiber_km) {
    if (l < 0.0) throw ConfigError("fiber lengths must be non-negative");
  }
  const bool imdd_only = sweep == SweepVariable::v_pp || sweep == SweepVariable::launch_power_dbm;
  if (imdd_only && !link.is_imdd()) throw ConfigError(std::string(to_string(sweep)) + " sweeps need an IM/DD link");
  if (sweep == SweepVariable::snr_db && link.is_imdd()) throw ConfigError("snr_db sweeps need the AWGN link");
  if (sweep == SweepVariable::spacing_ghz && !link.wdm.enabled) throw ConfigError("spacing sweeps need WDM");
  for (train::Variant v : variants) {
    const bool volterra = v == train::Variant::RRC_Volterra || v == train::Variant::PS_Volterra;
    if (volterra && !link.is_imdd()) throw ConfigError("Volterra variants are defined for IM/DD links");
  }
  for (double value : sweep_values) at_point(link, sweep, value).validate();
  if (training.batch_size < 1 || training.n_symbols < training.batch_size) {
    throw ConfigError("training.n_symbols must cover at least one batch");
  }
}

namespace {

template <typename T>
T scalar(const YAML::Node& node, const std::string& where) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

template <typename T>
void read_opt(const YAML::Node& map, const char* key, T& out, const std::string& scope) {
  if (map && map[key]) out = scalar<T>(map[key], scope + "." + key);
}

void reject_unknown(const YAML::Node& map, std::initializer_list<const char*> keys, const std::string& scope) {
  if (!map) return;
  if (!map.IsMap()) throw ConfigError(scope + ": expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError(scope + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
std::vector<T> list(const YAML::Node& node, const std::string& where) {
  std::vector<T> out;
  if (!node) return out;
  if (node.IsScalar()) return {scalar<T>(node, where)};
  if (!node.IsSequence()) throw ConfigError(where + ": expected a list");
  for (const auto& item : node) out.push_back(scalar<T>(item, where));
  return out;
}

}  // namespace

ExperimentSpec parse_experiment(const YAML::Node& root, const fs::path& base_dir) {
  if (!root || !root.IsMap()) throw ConfigError("experiment file must be a mapping");
  reject_unknown(root,
                 {"name", "link", "train_link", "sweep", "variants", "n_taps", "fiber_km", "seeds", "master_seed",
                  "training", "evaluation", "output", "notes"},
                 "experiment");
  ExperimentSpec spec;
  read_opt(root, "name", spec.name, "experiment");
  if (!root["link"]) throw ConfigError("experiment: missing 'link'");
  spec.link = link::apply_link_overrides(link::default_link_config(link::LinkKind::awgn), root["link"],
                                         base_dir.string());
  if (root["train_link"]) spec.train_link = link::apply_link_overrides(spec.link, root["train_link"], base_dir.string());

  const YAML::Node sweep = root["sweep"];
  if (!sweep) throw ConfigError("experiment: missing 'sweep'");
  reject_unknown(sweep, {"variable", "values"}, "sweep");
  spec.sweep = parse_sweep_variable(scalar<std::string>(sweep["variable"], "sweep.variable"));
  spec.sweep_values = list<double>(sweep["values"], "sweep.values");

  for (const auto& v : list<std::string>(root["variants"], "variants")) spec.variants.push_back(train::parse_variant(v));
  for (long n : list<long>(root["n_taps"], "n_taps")) spec.n_taps.push_back(n);
  if (root["fiber_km"]) spec.fiber_km = list<double>(root["fiber_km"], "fiber_km");
  if (root["seeds"]) {
    if (root["seeds"].IsScalar()) {
      const int count = scalar<int>(root["seeds"], "seeds");
      if (count < 1) throw ConfigError("seeds: count must be >= 1");
      spec.seeds.clear();
      for (int s = 0; s < count; ++s) spec.seeds.push_back(s);
    } else {
      spec.seeds = list<int>(root["seeds"], "seeds");
    }
  }
  read_opt(root, "master_seed", spec.master_seed, "experiment");

  const YAML::Node tr = root["training"];
  reject_unknown(tr,
                 {"n_symbols", "batch_size", "lr_filters", "lr_scalars", "clip_norm", "beta1", "beta2", "eps",
                  "warmup_fraction", "div_start", "div_final", "volterra_n1", "volterra_n2", "train_snr_db"},
                 "training");
  train::TrainingHyper& h = spec.training;
  read_opt(tr, "n_symbols", h.n_symbols, "training");
  read_opt(tr, "batch_size", h.batch_size, "training");
  read_opt(tr, "lr_filters", h.lr_filters, "training");
  read_opt(tr, "lr_scalars", h.lr_scalars, "training");
  read_opt(tr, "clip_norm", h.clip_norm, "training");
  read_opt(tr, "beta1", h.beta1, "training");
  read_opt(tr, "beta2", h.beta2, "training");
  read_opt(tr, "eps", h.eps, "training");
  read_opt(tr, "warmup_fraction", h.warmup_fraction, "training");
  read_opt(tr, "div_start", h.div_start, "training");
  read_opt(tr, "div_final", h.div_final, "training");
  read_opt(tr, "volterra_n1", h.volterra_n1, "training");
  read_opt(tr, "volterra_n2", h.volterra_n2, "training");
  read_opt(tr, "train_snr_db", h.train_snr_db, "training");

  const YAML::Node ev = root["evaluation"];
  reject_unknown(ev, {"block_symbols", "min_errors", "min_symbols", "max_symbols", "snr_db"}, "evaluation");
  read_opt(ev, "block_symbols", spec.evaluation.block_symbols, "evaluation");
  read_opt(ev, "min_errors", spec.evaluation.min_errors, "evaluation");
  read_opt(ev, "min_symbols", spec.evaluation.min_symbols, "evaluation");
  read_opt(ev, "max_symbols", spec.evaluation.max_symbols, "evaluation");
  read_opt(ev, "snr_db", spec.eval_snr_db, "evaluation");

  std::string output;
  read_opt(root, "output", output, "experiment");
  if (!output.empty()) spec.output = output;
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("experiment file not found: " + path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_experiment(root, path.parent_path());
}

fs::path preset_path(const std::string& name) {
  const fs::path p = fs::path(E2E_PRESET_DIR) / (name + ".yaml");
  if (!fs::exists(p)) throw ConfigError("unknown preset '" + name + "'");
  return p;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(E2E_PRESET_DIR)) {
    if (entry.path().extension() == ".yaml") out.push_back(entry.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols = {"sweep_var_name", "sweep_value", "variant",   "n_taps",
                                                "fiber_km",       "seed",        "ser",       "ser_ci_lo",
                                                "ser_ci_hi",      "trained_at",  "config_hash"};
  return cols;
}

std::uint64_t seed_derive(std::uint64_t master_seed, std::string_view variant, std::int64_t sweep_index,
                          std::int64_t repeat_index) {
  std::uint64_t s = combine_seed(master_seed, fnv1a(variant));
  s = combine_seed(s, static_cast<std::uint64_t>(sweep_index));
  return combine_seed(s, static_cast<std::uint64_t>(repeat_index));
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::string config_hash(const ExperimentSpec& s) {
  std::string text = "link\n" + link::describe(s.link);
  if (s.train_link) text += "train_link\n" + link::describe(*s.train_link);
  text += "sweep=" + std::string(to_string(s.sweep)) + "\n";
  for (double v : s.sweep_values) text += fmt("value=%.17g\n", v);
  for (train::Variant v : s.variants) text += "variant=" + std::string(train::to_string(v)) + "\n";
  for (Eigen::Index n : s.n_taps) text += fmt("n_taps=%.17g\n", static_cast<double>(n));
  for (double l : s.fiber_km) text += fmt("fiber_km=%.17g\n", l);
  for (int seed : s.seeds) text += fmt("seed=%.17g\n", seed);
  text += "master_seed=" + std::to_string(s.master_seed) + "\n";
  const train::TrainingHyper& h = s.training;
  for (double v : {static_cast<double>(h.batch_size), static_cast<double>(h.n_symbols), h.lr_filters, h.lr_scalars,
                   h.clip_norm, h.beta1, h.beta2, h.eps, h.warmup_fraction, h.div_start, h.div_final,
                   static_cast<double>(h.volterra_n1), static_cast<double>(h.volterra_n2), h.train_snr_db}) {
    text += fmt("train=%.17g\n", v);
  }
  const train::EvalPlan& e = s.evaluation;
  for (double v : {static_cast<double>(e.block_symbols), static_cast<double>(e.min_errors),
                   static_cast<double>(e.min_symbols), static_cast<double>(e.max_symbols), s.eval_snr_db}) {
    text += fmt("eval=%.17g\n", v);
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

LinkConfig at_point(LinkConfig cfg, SweepVariable var, double value) {
  switch (var) {
    case SweepVariable::snr_db:
      break;
    case SweepVariable::v_pp:
      cfg.v_pp = value;
      break;
    case SweepVariable::spacing_ghz:
      cfg.wdm.spacing_hz = value * 1e9;
      break;
    case SweepVariable::launch_power_dbm:
      cfg.laser_power_eam_dbm = value;
      cfg.laser_power_ideal_dbm = value;
      break;
  }
  return cfg;
}

namespace {

struct Job {
  train::Variant variant;
  Eigen::Index n_taps;
  double fiber_km;
  int repeat;
  /// Sweep point index, or -1 for a job that trains once and evaluates the
  /// whole grid.
  std::int64_t point;
};

bool trains_once(const ExperimentSpec& s) {
  return (s.sweep == SweepVariable::snr_db) || s.sweep == SweepVariable::launch_power_dbm;
}

std::string point_label(SweepVariable var, double value) { return std::string(to_string(var)) + fmt("=%g", value); }

std::vector<ResultRow> run_job(const ExperimentSpec& spec, const Job& job, const std::string& hash,
                               const RunOptions& options) {
  const std::string variant(train::to_string(job.variant));
  LinkConfig base = spec.link;
  base.fiber_km = job.fiber_km;

  train::TrainPlan plan;
  plan.variant = job.variant;
  plan.n_taps = job.n_taps;
  plan.hyper = spec.training;
  plan.seed = seed_derive(spec.master_seed, variant, job.point, job.repeat);

  LinkConfig train_cfg;
  std::string trained_at;
  std::vector<std::int64_t> points;
  if (job.point < 0) {
    if (spec.sweep == SweepVariable::launch_power_dbm) {
      train_cfg = spec.train_link.value_or(spec.link);
      train_cfg.fiber_km = job.fiber_km;
      trained_at = point_label(SweepVariable::launch_power_dbm, link::watt_to_dbm(train_cfg.laser_power_w()));
    } else {
      train_cfg = base;
      trained_at = point_label(SweepVariable::snr_db, spec.training.train_snr_db);
    }
    for (std::size_t i = 0; i < spec.sweep_values.size(); ++i) points.push_back(static_cast<std::int64_t>(i));
  } else {
    const double value = spec.sweep_values[static_cast<std::size_t>(job.point)];
    train_cfg = at_point(base, spec.sweep, value);
    trained_at = point_label(spec.sweep, value);
    points.push_back(job.point);
  }

  std::optional<train::TrainResult> trained;
  try {
    trained = train::train(plan, train_cfg);
  } catch (const train::TrainingAborted& e) {
    trained_at = std::string("aborted: ") + e.what();
  }
  if (trained && options.log_dir) {
    fs::create_directories(*options.log_dir);
    const std::string file = variant + "_N" + std::to_string(job.n_taps) + fmt("_L%g", job.fiber_km) + "_s" +
                             std::to_string(job.repeat) + "_p" + std::to_string(job.point) + ".csv";
    write_train_log(trained->log, *options.log_dir / file);
  }

  std::vector<ResultRow> rows;
  for (std::int64_t p : points) {
    const double value = spec.sweep_values[static_cast<std::size_t>(p)];
    ResultRow row{std::string(to_string(spec.sweep)), value, variant, job.n_taps, job.fiber_km, job.repeat,
                  std::nan(""), std::nan(""), std::nan(""), trained_at, hash};
    if (trained) {
      const LinkConfig eval_cfg = at_point(base, spec.sweep, value);
      const double snr = spec.sweep == SweepVariable::snr_db ? value : spec.eval_snr_db;
      const metrics::SerEstimate s = train::evaluate_ser(trained->params, eval_cfg, spec.evaluation, snr,
                                                         seed_derive(spec.master_seed, "eval", p, job.repeat));
      row.ser = s.rate;
      row.ser_ci_lo = s.ci_lo;
      row.ser_ci_hi = s.ci_hi;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

SweepResult run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  const std::string hash = config_hash(spec);
  std::vector<Job> jobs;
  for (train::Variant v : spec.variants) {
    for (Eigen::Index n : spec.n_taps) {
      for (double l : spec.fiber_km) {
        for (int r : spec.seeds) {
          if (trains_once(spec)) {
            jobs.push_back({v, n, l, r, -1});
          } else {
            for (std::size_t p = 0; p < spec.sweep_values.size(); ++p) {
              jobs.push_back({v, n, l, r, static_cast<std::int64_t>(p)});
            }
          }
        }
      }
    }
  }

  std::vector<std::vector<ResultRow>> out(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        out[i] = run_job(spec, jobs[i], hash, options);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(options.jobs, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult result;
  for (auto& rows : out) {
    for (auto& row : rows) result.rows.push_back(std::move(row));
  }
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.variant, a.n_taps, a.fiber_km, a.sweep_value, a.seed) <
           std::tie(b.variant, b.n_taps, b.fiber_km, b.sweep_value, b.seed);
  });
  return result;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ConfigError("CSV: unterminated quoted field");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

void serialize_results(const SweepResult& result, const fs::path& path) {
  std::string text;
  const auto& cols = result_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) text += (i ? "," : "") + cols[i];
  text += "\r\n";
  for (const ResultRow& r : result.rows) {
    const std::vector<std::string> fields = {csv_field(r.sweep_var_name),
                                             fmt("%.8e", r.sweep_value),
                                             csv_field(r.variant),
                                             std::to_string(r.n_taps),
                                             fmt("%.8e", r.fiber_km),
                                             std::to_string(r.seed),
                                             fmt("%.8e", r.ser),
                                             fmt("%.8e", r.ser_ci_lo),
                                             fmt("%.8e", r.ser_ci_hi),
                                             csv_field(r.trained_at),
                                             csv_field(r.config_hash)};
    for (std::size_t i = 0; i < fields.size(); ++i) text += (i ? "," : "") + fields[i];
    text += "\r\n";
  }
  write_text(path, text);
}

SweepResult read_results(const fs::path& path) {
  const auto records = parse_csv(read_text(path));
  if (records.empty() || records.front() != result_columns()) {
    throw ConfigError(path.string() + ": unexpected result header");
  }
  SweepResult out;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    if (f.size() != result_columns().size()) throw ConfigError(path.string() + ": malformed row");
    ResultRow r;
    r.sweep_var_name = f[0];
    r.sweep_value = std::strtod(f[1].c_str(), nullptr);
    r.variant = f[2];
    r.n_taps = std::stol(f[3]);
    r.fiber_km = std::strtod(f[4].c_str(), nullptr);
    r.seed = std::stoi(f[5]);
    r.ser = std::strtod(f[6].c_str(), nullptr);
    r.ser_ci_lo = std::strtod(f[7].c_str(), nullptr);
    r.ser_ci_hi = std::strtod(f[8].c_str(), nullptr);
    r.trained_at = f[9];
    r.config_hash = f[10];
    out.rows.push_back(std::move(r));
  }
  return out;
}

void write_train_log(const std::vector<train::TrainLogEntry>& log, const fs::path& path) {
  std::string text = "batch,lr,loss,grad_norm\r\n";
  for (const auto& e : log) {
    text += std::to_string(e.batch) + "," + fmt("%.8e", e.lr) + "," + fmt("%.8e", e.loss) + "," +
            fmt("%.8e", e.grad_norm) + "\r\n";
  }
  write_text(path, text);
}

namespace {

constexpr const char* kParamFormat = "e2e-fir-parameters";
constexpr int kParamVersion = 1;

std::vector<double> to_std(const RealVector& v) { return {v.data(), v.data() + v.size()}; }

RealVector from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const RealVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void save_parameters(const ParameterFile& file, const fs::path& path) {
  const train::SystemParameters& p = file.params;
  nlohmann::json j;
  j["format"] = kParamFormat;
  j["version"] = kParamVersion;
  j["config_hash"] = file.config_hash;
  j["variant"] = std::string(train::to_string(file.variant));
  j["delay_samples"] = file.delay_samples;
  j["sps"] = p.h_p.sps;
  j["h_p"] = to_std(p.h_p.coeffs);
  j["h_r"] = to_std(p.h_r.coeffs);
  if (p.ffe) j["ffe"] = to_std(p.ffe->coeffs);
  if (p.volterra) {
    j["volterra"] = {{"k1", to_std(p.volterra->k1)}, {"k2", to_std(p.volterra->k2)}, {"n2", p.volterra->n2}};
  }
  j["g_dac"] = p.g_dac;
  j["v_b"] = p.v_b;
  write_text(path, j.dump(2) + "\n");
}

ParameterFile load_parameters(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (j.value("format", "") != kParamFormat) throw ConfigError(path.string() + ": not a parameter file");
  if (j.value("version", 0) != kParamVersion) throw ConfigError(path.string() + ": unsupported version");
  try {
    ParameterFile f;
    f.config_hash = j.at("config_hash").get<std::string>();
    f.variant = train::parse_variant(j.at("variant").get<std::string>());
    f.delay_samples = j.at("delay_samples").get<Eigen::Index>();
    const int sps = j.at("sps").get<int>();
    f.params.h_p = FilterTaps(from_json(j.at("h_p")), sps);
    f.params.h_r = FilterTaps(from_json(j.at("h_r")), sps);
    if (j.contains("ffe")) f.params.ffe = FilterTaps(from_json(j["ffe"]), sps);
    if (j.contains("volterra")) {
      const auto& v = j["volterra"];
      f.params.volterra = eq::VolterraKernel(from_json(v.at("k1")), from_json(v.at("k2")), v.at("n2").get<Eigen::Index>());
    }
    f.params.g_dac = j.at("g_dac").get<double>();
    f.params.v_b = j.at("v_b").get<double>();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_gnuplot_script(const ExperimentSpec& spec, const fs::path& csv_path, const fs::path& script_path) {
  std::string s;
  s += "# " + (spec.name.empty() ? std::string("experiment") : spec.name) + "\n";
  s += "set datafile separator \",\"\n";
  s += "set logscale y\n";
  s += "set format y \"10^{%L}\"\n";
  s += "set xlabel \"" + std::string(to_string(spec.sweep)) + "\"\n";
  s += "set ylabel \"SER\"\n";
  s += "set key outside right\n";
  s += "set grid\n";
  std::vector<std::string> curves;
  for (train::Variant v : spec.variants) {
    for (Eigen::Index n : spec.n_taps) {
      for (double l : spec.fiber_km) {
        const std::string name(train::to_string(v));
        curves.push_back("'" + csv_path.string() + "' every ::1 using 2:((strcol(3) eq \"" + name +
                         "\" && $4 == " + std::to_string(n) + " && abs($5 - " + fmt("%g", l) +
                         ") < 1e-9 && $7 > 0) ? $7 : 1/0) with linespoints title \"" + name + " N=" +
                         std::to_string(n) + fmt(" L=%g km", l) + "\"");
      }
    }
  }
  if (spec.link.kind == link::LinkKind::awgn && spec.sweep == SweepVariable::snr_db) {
    curves.push_back("0.75*erfc(sqrt(0.2*10**(x/10))) with lines dt 2 title \"theory\"");
  }
  if (spec.link.is_imdd()) curves.push_back("4.8e-4 with lines dt 3 lc rgb \"black\" title \"KP4\"");
  s += "plot ";
  for (std::size_t i = 0; i < curves.size(); ++i) s += (i ? ", \\\n     " : "") + curves[i];
  s += "\n";
  write_text(script_path, s);
}

void write_matrix_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& header, const fs::path& path) {
  std::string text;
  for (std::size_t i = 0; i < header.size(); ++i) text += (i ? "," : "") + csv_field(header[i]);
  if (!header.empty()) text += "\r\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) text += (c ? "," : "") + fmt("%.8e", m(r, c));
    text += "\r\n";
  }
  write_text(path, text);
}

}  // namespace e2e::harness
