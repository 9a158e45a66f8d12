#pragma once

#include "e2e/types.hpp"

namespace e2e {

/// Sorted real constellation levels.
struct Constellation {
  RealVector levels;

  /// PAM-M levels {-(M-1), ..., M-1} scaled to unit mean power.
  static Constellation pam(int order);
  /// PAM-M levels without scaling.
  static Constellation pam_unscaled(int order);

  int order() const { return static_cast<int>(levels.size()); }
  double mean_power() const { return levels.squaredNorm() / static_cast<double>(levels.size()); }
};

}  // namespace e2e
