#pragma once

#include <string>
#include <vector>

#include "e2e/types.hpp"

namespace e2e::link {

/// Natural cubic spline through (voltage, absorption dB) knots. Inputs
/// outside the knot range clamp to the boundary knot, with zero slope.
class AbsorptionSpline {
 public:
  AbsorptionSpline() = default;
  AbsorptionSpline(std::vector<double> voltages, std::vector<double> absorption_db);

  struct Sample {
    double value = 0.0;
    double slope = 0.0;
    bool clamped = false;
  };

  Sample evaluate(double v) const;
  double operator()(double v) const { return evaluate(v).value; }
  double second_derivative(double v) const;

  bool empty() const { return knots_v_.empty(); }
  double v_min() const { return knots_v_.front(); }
  double v_max() const { return knots_v_.back(); }
  const std::vector<double>& voltages() const { return knots_v_; }
  const std::vector<double>& absorption_db() const { return knots_a_; }

 private:
  std::size_t segment(double v) const;

  std::vector<double> knots_v_;  // ascending
  std::vector<double> knots_a_;
  std::vector<double> m_;        // second derivatives at the knots
};

/// Reads a knot table from a YAML file with `voltage_v` and `absorption_db`
/// arrays.
AbsorptionSpline load_absorption_table(const std::string& path);

/// The knot table shipped in the data directory.
AbsorptionSpline default_absorption_table();

}  // namespace e2e::link
