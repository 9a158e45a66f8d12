#include "e2e/link/absorption.hpp"

#include <algorithm>

#include <yaml-cpp/yaml.h>

#ifndef E2E_DATA_DIR
#define E2E_DATA_DIR "data"
#endif

namespace e2e::link {

AbsorptionSpline::AbsorptionSpline(std::vector<double> voltages, std::vector<double> absorption_db) {
  if (voltages.size() != absorption_db.size()) throw ConfigError("absorption table: column lengths differ");
  if (voltages.size() < 3) throw ConfigError("absorption table: need at least three knots");
  std::vector<std::size_t> order(voltages.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return voltages[a] < voltages[b]; });
  for (std::size_t i : order) {
    knots_v_.push_back(voltages[i]);
    knots_a_.push_back(absorption_db[i]);
  }
  const std::size_t n = knots_v_.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (!(knots_v_[i] > knots_v_[i - 1])) throw ConfigError("absorption table: duplicate voltage knot");
  }

  // Natural end conditions: zero second derivative at both ends.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  a(0, 0) = 1.0;
  a(n - 1, n - 1) = 1.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = knots_v_[i] - knots_v_[i - 1];
    const double h1 = knots_v_[i + 1] - knots_v_[i];
    a(i, i - 1) = h0;
    a(i, i) = 2.0 * (h0 + h1);
    a(i, i + 1) = h1;
    rhs[i] = 6.0 * ((knots_a_[i + 1] - knots_a_[i]) / h1 - (knots_a_[i] - knots_a_[i - 1]) / h0);
  }
  const Eigen::VectorXd m = a.partialPivLu().solve(rhs);
  m_.assign(m.data(), m.data() + n);
}

std::size_t AbsorptionSpline::segment(double v) const {
  const auto it = std::upper_bound(knots_v_.begin(), knots_v_.end(), v);
  const std::size_t idx = static_cast<std::size_t>(std::distance(knots_v_.begin(), it));
  return std::clamp<std::size_t>(idx, 1, knots_v_.size() - 1) - 1;
}

AbsorptionSpline::Sample AbsorptionSpline::evaluate(double v) const {
  if (empty()) throw ConfigError("absorption spline has no knots");
  if (v <= knots_v_.front() || v >= knots_v_.back()) {
    const bool low = v <= knots_v_.front();
    const double edge = low ? knots_a_.front() : knots_a_.back();
    const bool on_knot = v == knots_v_.front() || v == knots_v_.back();
    if (!on_knot) return {edge, 0.0, true};
  }
  const std::size_t i = segment(v);
  const double h = knots_v_[i + 1] - knots_v_[i];
  const double l = knots_v_[i + 1] - v;
  const double r = v - knots_v_[i];
  const double c0 = knots_a_[i] / h - m_[i] * h / 6.0;
  const double c1 = knots_a_[i + 1] / h - m_[i + 1] * h / 6.0;
  Sample s;
  s.value = m_[i] * l * l * l / (6.0 * h) + m_[i + 1] * r * r * r / (6.0 * h) + c0 * l + c1 * r;
  s.slope = -m_[i] * l * l / (2.0 * h) + m_[i + 1] * r * r / (2.0 * h) - c0 + c1;
  return s;
}

double AbsorptionSpline::second_derivative(double v) const {
  if (v < knots_v_.front() || v > knots_v_.back()) return 0.0;
  const std::size_t i = segment(v);
  const double h = knots_v_[i + 1] - knots_v_[i];
  return (m_[i] * (knots_v_[i + 1] - v) + m_[i + 1] * (v - knots_v_[i])) / h;
}

AbsorptionSpline load_absorption_table(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot read absorption table '" + path + "': " + e.what());
  }
  if (!root["voltage_v"] || !root["absorption_db"]) {
    throw ConfigError("absorption table '" + path + "' needs voltage_v and absorption_db arrays");
  }
  return {root["voltage_v"].as<std::vector<double>>(), root["absorption_db"].as<std::vector<double>>()};
}

AbsorptionSpline default_absorption_table() {
  return load_absorption_table(std::string(E2E_DATA_DIR) + "/eam_absorption.yaml");
}

}  // namespace e2e::link
