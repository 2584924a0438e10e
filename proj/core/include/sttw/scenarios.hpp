#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sttw/robot_params.hpp"
#include "sttw/types.hpp"

namespace sttw {

using DisturbanceProfile = std::function<DisturbanceVec(double)>;
using ReferenceProfile = std::function<Reference(double)>;

/// A closed-loop experiment: duration, initial state, disturbance and
/// reference profiles, and the seed driving any randomized components.
struct Scenario {
  std::string name;
  double duration = 10.0;
  uint64_t seed = 0;
  StateVec initial_state = StateVec::Zero();
  DisturbanceProfile disturbance;
  ReferenceProfile reference;
};

enum class TiltDirection { kLateral, kLongitudinal };

/// Gravity-component disturbance of an inclined board ramping linearly to
/// max_angle and holding. Lateral tilt loads the roll channel
/// (d_phi = m g h sin(theta)); longitudinal tilt loads the rear-wheel
/// channel (d_r = -m g r sin(theta)).
DisturbanceProfile inclined_plane_profile(TiltDirection direction,
                                          double max_angle, double ramp_rate,
                                          const RobotParams& params);

/// Rear position command: steps through 0.15, 0, -0.15, 0 every
/// `segment` seconds, smoothed by a first-order filter with time constant
/// tau_ref. The steering reference stays at delta_ref.
Reference rear_position_reference(double t, double tau_ref = 0.5,
                                  double delta_ref = 0.3,
                                  double segment = 16.0);

/// Slow-varying seeded perturbation: per channel a sum of three sinusoids
/// with randomized amplitudes, periods and phases. Fully deterministic for
/// a given seed on every platform.
DisturbanceProfile seeded_drift(uint64_t seed, double amplitude_r,
                                double amplitude_phi);

/// Parameters of the built-in scenarios; which fields apply depends on the
/// scenario name.
struct ScenarioConfig {
  std::string name = "constant-disturbance";
  double duration = -1.0;  ///< negative = per-scenario default
  uint64_t seed = 0;
  double delta_ref = 0.3;
  double s_ref = 0.0;
  double initial_roll_offset = 0.0;

  // constant-disturbance / ramp-disturbance
  double d_phi = 0.2;
  double d_r = 0.05;
  double ramp_rate_phi = 0.05;  ///< [N m / s]

  // incline-lateral / incline-longitudinal
  double max_angle_deg = -1.0;      ///< negative = per-direction default
  double ramp_rate_deg = 0.5;       ///< [deg / s]

  // rear-tracking
  double tau_ref = 0.5;
  double base_d_phi = 2.5;
  double base_d_r = 0.35;
  double base_ramp_time = 2.0;  ///< smooth ramp-in of the base disturbance
  double drift_amp_phi = 0.12;
  double drift_amp_r = 0.03;
};

/// Names accepted by make_scenario.
std::vector<std::string> builtin_scenario_names();

/// Builds one of the built-in scenarios; throws ConfigError for an unknown
/// name. The initial state is the undisturbed equilibrium for the initial
/// reference, plus the configured roll offset.
Scenario make_scenario(const ScenarioConfig& config,
                       const RobotParams& params);

}  // namespace sttw
