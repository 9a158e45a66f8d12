#pragma once

#include <string>
#include <string_view>

#include "e2e/link/absorption.hpp"
#include "e2e/types.hpp"

namespace YAML {
class Node;
}

namespace e2e::link {

enum class LinkKind { awgn, imdd_ideal, imdd_eam };
enum class FiberModel { linear, ssfm };
enum class Mode { train, eval };

std::string_view to_string(LinkKind kind);
LinkKind parse_link_kind(std::string_view name);

struct PhotodiodeParams {
  double boltzmann_j_per_k = 1.38e-23;
  double temperature_k = 293.0;
  double bandwidth_hz = 45e9;
  double impedance_ohm = 50.0;
  double electron_charge_c = 1.6e-19;
  double responsivity_a_per_w = 1.0;
  double dark_current_a = 1e-8;
  bool noise = true;
};

struct WdmParams {
  bool enabled = false;
  int n_channels = 3;
  double spacing_hz = 150e9;
  double select_f3db_hz = 65e9;
  int select_order = 5;
};

/// Physical and structural parameters of one simulated link. Defaults follow
/// the IM/DD parameter table; AWGN presets override sps and the select
/// bandwidth.
struct LinkConfig {
  LinkKind kind = LinkKind::awgn;

  int sps = 4;
  double symbol_rate_hz = 100e9;
  int pam_order = 4;
  double rrc_rolloff = 0.01;
  int rrc_span = 24;

  bool bandlimit = true;
  int bessel_order = 5;
  double dac_f3db_hz = 45e9;
  double adc_f3db_hz = 45e9;

  double v_pp = 2.2;
  double laser_power_ideal_dbm = -13.0;
  double laser_power_eam_dbm = -6.0;
  double chirp_alpha = 1.0;
  AbsorptionSpline absorption;

  double wavelength_m = 1270e-9;
  double dispersion_ps_per_nm_km = -15.43;
  double dispersion_slope_ps_per_nm2_km = 0.092;
  double lambda0_m = 1310e-9;
  double attenuation_db_per_km = 0.2;
  double fiber_km = 0.0;
  FiberModel fiber_model = FiberModel::linear;
  double gamma_per_w_km = 1.3;
  double ssfm_step_km = 0.25;

  PhotodiodeParams photodiode;
  WdmParams wdm;
  int quant_bits = 5;
  bool quantize_eval = true;

  double sample_rate() const { return symbol_rate_hz * sps; }
  bool is_imdd() const { return kind != LinkKind::awgn; }
  /// Laser power of the configured modulator, in watts.
  double laser_power_w() const;
  /// Chromatic dispersion in s/m^2.
  double dispersion_si() const { return dispersion_ps_per_nm_km * 1e-6; }

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

/// Defaults for a link kind (AWGN: 4 sps; IM/DD: 8 sps, EAM knot table).
LinkConfig default_link_config(LinkKind kind);

/// Overlays keys from a YAML mapping onto `base`. Keys carry their unit,
/// e.g. `dac_f3db_ghz`, `fiber_length_km`. `base_dir` resolves a relative
/// `absorption_table` path.
LinkConfig apply_link_overrides(LinkConfig base, const YAML::Node& node, const std::string& base_dir = ".");

/// Canonical text form used for hashing and logging.
std::string describe(const LinkConfig& cfg);

}  // namespace e2e::link
