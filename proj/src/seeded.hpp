#pragma once

// Portable seeded weight initialisation. std::mt19937_64 has a fixed output
// sequence; the distribution mapping is done by hand so weights are
// bit-identical across standard library implementations.

#include <cmath>
#include <cstdint>
#include <random>

#include "duotrack/tensor.hpp"

namespace duotrack::detail {

class SeededUniform {
 public:
  explicit SeededUniform(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [-bound, bound).
  float symmetric(double bound) { return static_cast<float>((2.0 * unit() - 1.0) * bound); }

 private:
  std::mt19937_64 engine_;
};

/// Fan-in scaled uniform init: values and bias in [-s, s], s = (in*k*k)^-1/2.
inline ConvWeights seeded_conv(SeededUniform& rng, int out_ch, int in_ch, int k) {
  ConvWeights w(out_ch, in_ch, k);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch) * k * k);
  for (float& v : w.values) v = rng.symmetric(bound);
  for (float& v : w.bias) v = rng.symmetric(bound);
  return w;
}

}  // namespace duotrack::detail
