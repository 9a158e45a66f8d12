#include "e2e/link/random.hpp"

#include "e2e/constellation.hpp"

namespace e2e::link {

RealVector RandomNoise::gaussian(Eigen::Index n, double sigma) {
  RealVector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = sigma * normal_(rng_);
  return out;
}

RealVector FrozenNoise::gaussian(Eigen::Index n, double sigma) {
  if (cursor_ == draws_.size()) draws_.push_back(source_.gaussian(n, sigma));
  const RealVector& draw = draws_[cursor_++];
  if (draw.size() != n) throw ContractError("frozen noise replayed with a different length");
  return draw;
}

RealVector draw_pam_symbols(int order, Eigen::Index n, std::mt19937_64& rng) {
  if (order != 2 && order != 4 && order != 8) throw ContractError("PAM order must be 2, 4 or 8");
  if (n < 1) throw ContractError("symbol count must be >= 1");
  const Constellation c = Constellation::pam(order);
  std::uniform_int_distribution<int> pick(0, order - 1);
  RealVector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = c.levels[pick(rng)];
  return out;
}

RealVector draw_pam_symbols(int order, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return draw_pam_symbols(order, n, rng);
}

}  // namespace e2e::link
