#include "sttw/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "sttw/equilibrium.hpp"
#include "sttw/errors.hpp"

namespace sttw {

namespace {

// Portable uniform doubles in [0, 1) from the (fully specified) mt19937_64
// output stream; std::uniform_real_distribution is not reproducible across
// standard libraries.
double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

double smoothstep01(double w) {
  w = std::clamp(w, 0.0, 1.0);
  return w * w * (3.0 - 2.0 * w);
}

}  // namespace

DisturbanceProfile inclined_plane_profile(TiltDirection direction,
                                          double max_angle, double ramp_rate,
                                          const RobotParams& params) {
  if (!(max_angle < std::numbers::pi / 6.0)) {
    throw ConfigError("inclined-plane angle must stay below 30 deg");
  }
  if (!(ramp_rate > 0.0)) {
    throw ConfigError("inclined-plane ramp rate must be positive");
  }
  const double mgh = params.m * params.g * params.h;
  const double mgr = params.m * params.g * params.r;
  return [=](double t) {
    const double theta = std::min(std::max(t, 0.0) * ramp_rate, max_angle);
    DisturbanceVec d = DisturbanceVec::Zero();
    if (direction == TiltDirection::kLateral) {
      d[kIdxDPhi] = mgh * std::sin(theta);
    } else {
      d[kIdxDr] = -mgr * std::sin(theta);
    }
    return d;
  };
}

Reference rear_position_reference(double t, double tau_ref, double delta_ref,
                                  double segment) {
  static constexpr double kTargets[4] = {0.0, 0.15, 0.0, -0.15};
  Reference ref;
  ref.delta = delta_ref;
  if (t <= 0.0) {
    ref.s = 0.0;
    return ref;
  }
  const int seg = static_cast<int>(t / segment);
  // Filtered value at the start of each segment, advanced recursively.
  double start_value = 0.0;
  const double decay_full = std::exp(-segment / tau_ref);
  for (int i = 0; i < seg; ++i) {
    const double target = kTargets[i % 4];
    start_value = target + (start_value - target) * decay_full;
  }
  const double target = kTargets[seg % 4];
  const double dt_in_segment = t - seg * segment;
  ref.s = target + (start_value - target) * std::exp(-dt_in_segment / tau_ref);
  return ref;
}

DisturbanceProfile seeded_drift(uint64_t seed, double amplitude_r,
                                double amplitude_phi) {
  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ULL);
  struct Wave {
    double amp, omega, phase;
  };
  std::vector<Wave> waves_r(3), waves_phi(3);
  const double weights[3] = {0.5, 0.3, 0.2};
  for (int i = 0; i < 3; ++i) {
    // Periods between 20 s and 80 s keep the drift slow-varying.
    waves_r[i] = {amplitude_r * weights[i] * (0.6 + 0.8 * uniform01(gen)),
                  2.0 * std::numbers::pi / (20.0 + 60.0 * uniform01(gen)),
                  2.0 * std::numbers::pi * uniform01(gen)};
    waves_phi[i] = {amplitude_phi * weights[i] * (0.6 + 0.8 * uniform01(gen)),
                    2.0 * std::numbers::pi / (20.0 + 60.0 * uniform01(gen)),
                    2.0 * std::numbers::pi * uniform01(gen)};
  }
  return [waves_r, waves_phi](double t) {
    DisturbanceVec d = DisturbanceVec::Zero();
    for (const auto& w : waves_r) {
      d[kIdxDr] += w.amp * std::sin(w.omega * t + w.phase);
    }
    for (const auto& w : waves_phi) {
      d[kIdxDPhi] += w.amp * std::sin(w.omega * t + w.phase);
    }
    return d;
  };
}

std::vector<std::string> builtin_scenario_names() {
  return {"constant-disturbance", "ramp-disturbance", "incline-lateral",
          "incline-longitudinal", "rear-tracking"};
}

Scenario make_scenario(const ScenarioConfig& config,
                       const RobotParams& params) {
  Scenario sc;
  sc.name = config.name;
  sc.seed = config.seed;

  const Reference initial_ref{config.s_ref, config.delta_ref};
  const EquilibriumPoint nominal =
      track_stand_equilibrium(initial_ref, DisturbanceVec::Zero(), params);
  sc.initial_state = nominal.x_e;
  sc.initial_state[kIdxPhi] += config.initial_roll_offset;

  const double deg = std::numbers::pi / 180.0;

  if (config.name == "constant-disturbance") {
    sc.duration = config.duration > 0.0 ? config.duration : 15.0;
    const DisturbanceVec d(config.d_r, config.d_phi);
    sc.disturbance = [d](double) { return d; };
    sc.reference = [initial_ref](double) { return initial_ref; };
  } else if (config.name == "ramp-disturbance") {
    sc.duration = config.duration > 0.0 ? config.duration : 30.0;
    const double rate = config.ramp_rate_phi;
    sc.disturbance = [rate](double t) {
      return DisturbanceVec(0.0, rate * std::max(t, 0.0));
    };
    sc.reference = [initial_ref](double) { return initial_ref; };
  } else if (config.name == "incline-lateral" ||
             config.name == "incline-longitudinal") {
    const bool lateral = config.name == "incline-lateral";
    const double max_angle =
        (config.max_angle_deg > 0.0 ? config.max_angle_deg
                                    : (lateral ? 2.81 : 13.31)) *
        deg;
    const double ramp_rate = config.ramp_rate_deg * deg;
    sc.disturbance = inclined_plane_profile(
        lateral ? TiltDirection::kLateral : TiltDirection::kLongitudinal,
        max_angle, ramp_rate, params);
    const double ramp_time = max_angle / ramp_rate;
    sc.duration = config.duration > 0.0 ? config.duration : ramp_time + 10.0;
    sc.reference = [initial_ref](double) { return initial_ref; };
  } else if (config.name == "rear-tracking") {
    sc.duration = config.duration > 0.0 ? config.duration : 64.0;
    const DisturbanceVec base(config.base_d_r, config.base_d_phi);
    const double ramp_time = config.base_ramp_time;
    const DisturbanceProfile drift =
        seeded_drift(config.seed, config.drift_amp_r, config.drift_amp_phi);
    sc.disturbance = [base, ramp_time, drift](double t) {
      const double w =
          ramp_time > 0.0 ? smoothstep01(t / ramp_time) : 1.0;
      return DisturbanceVec(w * base + w * drift(t));
    };
    const double tau_ref = config.tau_ref;
    const double delta_ref = config.delta_ref;
    sc.reference = [tau_ref, delta_ref](double t) {
      return rear_position_reference(t, tau_ref, delta_ref);
    };
  } else {
    throw ConfigError("unknown scenario '" + config.name + "'");
  }
  return sc;
}

}  // namespace sttw
