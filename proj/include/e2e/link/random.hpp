#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "e2e/types.hpp"

namespace e2e::link {

/// Source of Gaussian noise realizations for the channel blocks.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;
  /// n samples of N(0, sigma^2).
  virtual RealVector gaussian(Eigen::Index n, double sigma) = 0;
};

class RandomNoise final : public NoiseSource {
 public:
  explicit RandomNoise(std::uint64_t seed) : rng_(seed) {}
  RealVector gaussian(Eigen::Index n, double sigma) override;

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Draws once, then replays the identical realizations on every later pass
/// (call rewind() between passes). The replayed vectors ignore sigma, so the
/// noise is a true constant of the parameters.
class FrozenNoise final : public NoiseSource {
 public:
  explicit FrozenNoise(std::uint64_t seed) : source_(seed) {}
  RealVector gaussian(Eigen::Index n, double sigma) override;
  void rewind() { cursor_ = 0; }

 private:
  RandomNoise source_;
  std::vector<RealVector> draws_;
  std::size_t cursor_ = 0;
};

class NoNoise final : public NoiseSource {
 public:
  RealVector gaussian(Eigen::Index n, double) override { return RealVector::Zero(n); }
};

/// i.i.d. uniform PAM-M symbols scaled to unit mean power.
RealVector draw_pam_symbols(int order, Eigen::Index n, std::mt19937_64& rng);
RealVector draw_pam_symbols(int order, Eigen::Index n, std::uint64_t seed);

}  // namespace e2e::link
