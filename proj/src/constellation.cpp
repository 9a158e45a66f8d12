#include "e2e/constellation.hpp"

#include <cmath>

namespace e2e {

Constellation Constellation::pam_unscaled(int order) {
  if (order < 2) throw ContractError("PAM order must be >= 2");
  Constellation c;
  c.levels.resize(order);
  for (int i = 0; i < order; ++i) c.levels[i] = 2.0 * i - (order - 1);
  return c;
}

Constellation Constellation::pam(int order) {
  Constellation c = pam_unscaled(order);
  c.levels /= std::sqrt(c.mean_power());
  return c;
}

}  // namespace e2e
