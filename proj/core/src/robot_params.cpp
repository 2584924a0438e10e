#include "sttw/robot_params.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sttw/errors.hpp"

namespace sttw {

void RobotParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string("robot parameter '") + name +
                        "' must be strictly positive");
    }
  };
  positive(a, "a");
  positive(b, "b");
  positive(c, "c");
  positive(h, "h");
  positive(r, "r");
  positive(m, "m");
  positive(I_t, "I_t");
  positive(I_r, "I_r");
  positive(g, "g");
  if (!(lambda > 0.0 && lambda < std::numbers::pi / 2.0)) {
    throw ConfigError("caster angle lambda must lie in (0, pi/2) rad");
  }
}

}  // namespace sttw
