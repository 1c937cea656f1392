#pragma once

#include <cstdint>
#include <random>

namespace glio {

/// Seeded standard-normal sampler: mt19937_64 uniforms through the Box-Muller
/// transform. The algorithm identifier "mt19937_64/box-muller/v1" is written
/// into dataset headers so golden files stay reproducible across builds.
class GaussianSampler {
 public:
  static constexpr const char* kAlgorithmId = "mt19937_64/box-muller/v1";

  explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

  double next();
  double next(double sigma) { return sigma * next(); }

 private:
  double uniform01();

  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace glio
