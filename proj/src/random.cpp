#include "glio/random.hpp"

#include <cmath>

namespace glio {

double GaussianSampler::uniform01() {
  // 53-bit mantissa uniform in (0, 1]; never returns 0 so log() stays finite.
  const std::uint64_t bits = rng_() >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

double GaussianSampler::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace glio
