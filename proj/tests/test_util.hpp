#pragma once

#include <random>

#include "sttw/types.hpp"

namespace sttw::test {

/// Portable uniform sampler on the raw mt19937_64 stream.
class UniformSource {
 public:
  explicit UniformSource(uint64_t seed) : gen_(seed) {}
  double operator()(double lo, double hi) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 gen_;
};

/// Random state inside the model domain.
inline StateVec random_state(UniformSource& rng) {
  StateVec x;
  x[kIdxS] = rng(-1.0, 1.0);
  x[kIdxVr] = rng(-1.0, 1.0);
  x[kIdxDelta] = rng(-1.2, 1.2);
  x[kIdxPhi] = rng(-1.2, 1.2);
  x[kIdxPhiDot] = rng(-3.0, 3.0);
  return x;
}

inline InputVec random_input(UniformSource& rng) {
  return InputVec(rng(-3.0, 3.0), rng(-3.0, 3.0));
}

inline DisturbanceVec random_disturbance(UniformSource& rng) {
  return DisturbanceVec(rng(-2.0, 2.0), rng(-2.0, 2.0));
}

}  // namespace sttw::test
