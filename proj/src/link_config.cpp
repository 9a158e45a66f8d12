#include "e2e/link/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include <yaml-cpp/yaml.h>

namespace e2e::link {

std::string_view to_string(LinkKind kind) {
  switch (kind) {
    case LinkKind::awgn:
      return "awgn";
    case LinkKind::imdd_ideal:
      return "imdd_ideal";
    case LinkKind::imdd_eam:
      return "imdd_eam";
  }
  return "?";
}

LinkKind parse_link_kind(std::string_view name) {
  if (name == "awgn") return LinkKind::awgn;
  if (name == "imdd_ideal") return LinkKind::imdd_ideal;
  if (name == "imdd_eam") return LinkKind::imdd_eam;
  throw ConfigError("unknown link kind '" + std::string(name) + "'");
}

double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
double watt_to_dbm(double watt) { return 10.0 * std::log10(watt / 1e-3); }

double LinkConfig::laser_power_w() const {
  return dbm_to_watt(kind == LinkKind::imdd_eam ? laser_power_eam_dbm : laser_power_ideal_dbm);
}

void LinkConfig::validate() const {
  if (sps < 1) throw ConfigError("sps must be >= 1");
  if (!(symbol_rate_hz > 0.0)) throw ConfigError("symbol rate must be positive");
  if (pam_order < 2) throw ConfigError("PAM order must be >= 2");
  const double nyquist = 0.5 * sample_rate();
  if (bandlimit && (dac_f3db_hz >= nyquist || adc_f3db_hz >= nyquist)) {
    throw ConfigError("converter cutoff must lie below the simulation Nyquist frequency");
  }
  if (is_imdd() && !(v_pp > 0.0)) throw ConfigError("v_pp must be positive");
  if (kind == LinkKind::imdd_eam && absorption.empty()) throw ConfigError("EAM link needs an absorption table");
  if (wdm.enabled) {
    if (wdm.n_channels < 1 || wdm.n_channels % 2 == 0) throw ConfigError("WDM channel count must be odd");
    const double edge = (wdm.n_channels / 2) * wdm.spacing_hz;
    if (edge >= nyquist) throw ConfigError("outer WDM channel lies beyond the simulation bandwidth");
  }
  if (fiber_km < 0.0) throw ConfigError("fiber length must be non-negative");
  if (!(ssfm_step_km > 0.0)) throw ConfigError("SSFM step must be positive");
  if (quant_bits < 1) throw ConfigError("quantizer needs at least one bit");
}

LinkConfig default_link_config(LinkKind kind) {
  LinkConfig cfg;
  cfg.kind = kind;
  if (kind == LinkKind::awgn) {
    cfg.sps = 4;
    cfg.wdm.select_f3db_hz = 65e9;
  } else {
    cfg.sps = 8;
    cfg.wdm.select_f3db_hz = 55e9;
    if (kind == LinkKind::imdd_eam) cfg.absorption = default_absorption_table();
  }
  return cfg;
}

namespace {

class Reader {
 public:
  explicit Reader(const YAML::Node& node, std::string scope) : node_(node), scope_(std::move(scope)) {
    if (node_ && !node_.IsMap()) throw ConfigError(scope_ + ": expected a mapping");
  }

  template <typename T>
  void get(const char* key, T& out, double scale = 1.0) {
    seen_.insert(key);
    if (!node_ || !node_[key]) return;
    try {
      if constexpr (std::is_same_v<T, double>) {
        out = node_[key].as<double>() * scale;
      } else {
        out = node_[key].as<T>();
      }
    } catch (const YAML::Exception& e) {
      throw ConfigError(scope_ + "." + key + ": " + e.what());
    }
  }

  YAML::Node child(const char* key) {
    seen_.insert(key);
    return node_ ? node_[key] : YAML::Node();
  }

  void reject_unknown() const {
    if (!node_) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.contains(key)) throw ConfigError(scope_ + ": unknown key '" + key + "'");
    }
  }

 private:
  YAML::Node node_;
  std::string scope_;
  std::set<std::string> seen_;
};

}  // namespace

LinkConfig apply_link_overrides(LinkConfig cfg, const YAML::Node& node, const std::string& base_dir) {
  Reader r(node, "link");
  std::string kind = std::string(to_string(cfg.kind));
  r.get("kind", kind);
  const LinkKind new_kind = parse_link_kind(kind);
  if (new_kind != cfg.kind) cfg = default_link_config(new_kind);

  r.get("sps", cfg.sps);
  r.get("symbol_rate_gbd", cfg.symbol_rate_hz, 1e9);
  r.get("pam_order", cfg.pam_order);
  r.get("rrc_rolloff", cfg.rrc_rolloff);
  r.get("rrc_span_symbols", cfg.rrc_span);
  r.get("bandlimit", cfg.bandlimit);
  r.get("bessel_order", cfg.bessel_order);
  r.get("dac_f3db_ghz", cfg.dac_f3db_hz, 1e9);
  r.get("adc_f3db_ghz", cfg.adc_f3db_hz, 1e9);
  r.get("v_pp_v", cfg.v_pp);
  r.get("laser_power_ideal_dbm", cfg.laser_power_ideal_dbm);
  r.get("laser_power_eam_dbm", cfg.laser_power_eam_dbm);
  r.get("chirp_alpha", cfg.chirp_alpha);
  std::string table;
  r.get("absorption_table", table);
  if (!table.empty()) {
    std::filesystem::path p(table);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    cfg.absorption = load_absorption_table(p.string());
  }
  r.get("wavelength_nm", cfg.wavelength_m, 1e-9);
  r.get("dispersion_ps_per_nm_km", cfg.dispersion_ps_per_nm_km);
  r.get("dispersion_slope_ps_per_nm2_km", cfg.dispersion_slope_ps_per_nm2_km);
  r.get("lambda0_nm", cfg.lambda0_m, 1e-9);
  r.get("attenuation_db_per_km", cfg.attenuation_db_per_km);
  r.get("fiber_length_km", cfg.fiber_km);
  std::string fiber_model = cfg.fiber_model == FiberModel::ssfm ? "ssfm" : "linear";
  r.get("fiber_model", fiber_model);
  if (fiber_model == "ssfm") {
    cfg.fiber_model = FiberModel::ssfm;
  } else if (fiber_model == "linear") {
    cfg.fiber_model = FiberModel::linear;
  } else {
    throw ConfigError("link.fiber_model must be 'linear' or 'ssfm'");
  }
  r.get("gamma_per_w_km", cfg.gamma_per_w_km);
  r.get("ssfm_step_km", cfg.ssfm_step_km);
  r.get("quant_bits", cfg.quant_bits);
  r.get("quantize_eval", cfg.quantize_eval);

  Reader pd(r.child("photodiode"), "link.photodiode");
  pd.get("boltzmann_j_per_k", cfg.photodiode.boltzmann_j_per_k);
  pd.get("temperature_k", cfg.photodiode.temperature_k);
  pd.get("bandwidth_ghz", cfg.photodiode.bandwidth_hz, 1e9);
  pd.get("impedance_ohm", cfg.photodiode.impedance_ohm);
  pd.get("electron_charge_c", cfg.photodiode.electron_charge_c);
  pd.get("responsivity_a_per_w", cfg.photodiode.responsivity_a_per_w);
  pd.get("dark_current_a", cfg.photodiode.dark_current_a);
  pd.get("noise", cfg.photodiode.noise);
  pd.reject_unknown();

  Reader w(r.child("wdm"), "link.wdm");
  w.get("enabled", cfg.wdm.enabled);
  w.get("n_channels", cfg.wdm.n_channels);
  w.get("spacing_ghz", cfg.wdm.spacing_hz, 1e9);
  w.get("select_f3db_ghz", cfg.wdm.select_f3db_hz, 1e9);
  w.get("select_order", cfg.wdm.select_order);
  w.reject_unknown();

  r.reject_unknown();
  cfg.validate();
  return cfg;
}

std::string describe(const LinkConfig& c) {
  std::string out;
  char buf[128];
  const auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s=%.17g\n", key, v);
    out += buf;
  };
  out += "kind=" + std::string(to_string(c.kind)) + "\n";
  put("sps", c.sps);
  put("symbol_rate_hz", c.symbol_rate_hz);
  put("pam_order", c.pam_order);
  put("rrc_rolloff", c.rrc_rolloff);
  put("rrc_span", c.rrc_span);
  put("bandlimit", c.bandlimit);
  put("bessel_order", c.bessel_order);
  put("dac_f3db_hz", c.dac_f3db_hz);
  put("adc_f3db_hz", c.adc_f3db_hz);
  put("v_pp", c.v_pp);
  put("laser_power_ideal_dbm", c.laser_power_ideal_dbm);
  put("laser_power_eam_dbm", c.laser_power_eam_dbm);
  put("chirp_alpha", c.chirp_alpha);
  for (std::size_t i = 0; i < c.absorption.voltages().size(); ++i) {
    std::snprintf(buf, sizeof buf, "absorption_knot=%.17g:%.17g\n", c.absorption.voltages()[i],
                  c.absorption.absorption_db()[i]);
    out += buf;
  }
  put("wavelength_m", c.wavelength_m);
  put("dispersion_ps_per_nm_km", c.dispersion_ps_per_nm_km);
  put("dispersion_slope_ps_per_nm2_km", c.dispersion_slope_ps_per_nm2_km);
  put("lambda0_m", c.lambda0_m);
  put("attenuation_db_per_km", c.attenuation_db_per_km);
  put("fiber_km", c.fiber_km);
  out += std::string("fiber_model=") + (c.fiber_model == FiberModel::ssfm ? "ssfm" : "linear") + "\n";
  put("gamma_per_w_km", c.gamma_per_w_km);
  put("ssfm_step_km", c.ssfm_step_km);
  put("pd.k", c.photodiode.boltzmann_j_per_k);
  put("pd.temperature_k", c.photodiode.temperature_k);
  put("pd.bandwidth_hz", c.photodiode.bandwidth_hz);
  put("pd.impedance_ohm", c.photodiode.impedance_ohm);
  put("pd.electron_charge_c", c.photodiode.electron_charge_c);
  put("pd.responsivity", c.photodiode.responsivity_a_per_w);
  put("pd.dark_current_a", c.photodiode.dark_current_a);
  put("pd.noise", c.photodiode.noise);
  put("wdm.enabled", c.wdm.enabled);
  put("wdm.n_channels", c.wdm.n_channels);
  put("wdm.spacing_hz", c.wdm.spacing_hz);
  put("wdm.select_f3db_hz", c.wdm.select_f3db_hz);
  put("wdm.select_order", c.wdm.select_order);
  put("quant_bits", c.quant_bits);
  put("quantize_eval", c.quantize_eval);
  return out;
}

}  // namespace e2e::link
