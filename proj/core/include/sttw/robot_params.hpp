#pragma once

namespace sttw {

/// Physical constants of the single-track two-wheeled robot.
///
/// Defaults are the test-bench values. Angles are radians, SI units
/// throughout; configuration files carry the caster angle in degrees and
/// convert at the boundary.
struct RobotParams {
  double a = 0.140;       ///< COM to rear contact point [m]
  double b = 0.408;       ///< wheelbase [m]
  double c = 0.024;       ///< trail at zero steer [m]
  double h = 0.2;         ///< COM height [m]
  double r = 0.1;         ///< wheel radius [m]
  double lambda = 0.43633231299858238;  ///< caster angle [rad] (25 deg)
  double m = 7.4;         ///< total mass [kg]
  double I_t = 0.356;     ///< roll inertia about the contact line [kg m^2]
  double I_r = 0.02;      ///< rear wheel spin inertia [kg m^2]
  double g = 9.81;        ///< gravity [m/s^2]

  /// Rear-wheel torque-to-acceleration gain r/(I_r + m r^2).
  double beta2() const { return r / (I_r + m * r * r); }
  /// Inverse roll inertia 1/(m h^2 + I_t).
  double beta5() const { return 1.0 / (m * h * h + I_t); }
  /// Effective rear drivetrain inertia I_r + m r^2.
  double drivetrain_inertia() const { return I_r + m * r * r; }
  /// Total roll inertia m h^2 + I_t.
  double roll_inertia() const { return m * h * h + I_t; }

  /// Throws ConfigError unless all fields are strictly positive and
  /// lambda lies in (0, pi/2).
  void validate() const;
};

}  // namespace sttw
