#pragma once

#include <optional>

#include "sttw/robot_params.hpp"
#include "sttw/types.hpp"

namespace sttw {

/// Angles closer than this to pi/2 are rejected as outside the model domain.
inline constexpr double kAngleDomainMargin = 1e-3;

/// Throws DomainError if delta or phi is too close to +-pi/2 for the
/// geometry relations (tan delta, 1/cos phi) to be meaningful.
void check_angle_domain(double delta, double phi);

/// Projection of the steering angle onto the horizontal plane:
/// tan(delta_p) cos(phi) = tan(delta) cos(lambda).
double delta_projection(double delta, double phi, const RobotParams& params);

/// Trail length c_f = c + r tan(lambda) (cos(delta) - 1).
double trail_length(double delta, const RobotParams& params);

/// Yaw deviation angle gamma = (c_f / b) sin(delta_p).
double yaw_deviation(double delta, double phi, const RobotParams& params);

/// Rear wheel turning radius R_r = b / tan(delta_p). Returns nullopt for a
/// straight line (delta_p == 0), never an infinite number.
std::optional<double> turning_radius(double delta, double phi,
                                     const RobotParams& params);

/// Lateral acceleration of the body frame. Sums the centrifugal v_r^2 term,
/// the longitudinal-acceleration / steer-rate term and the roll-rate
/// coupling term.
double lateral_acceleration(const StateVec& x, double v_r_dot,
                            double delta_dot, const RobotParams& params);

/// Full nonlinear vector field xdot = f_sys(x, u, d).
StateVec f_sys(const StateVec& x, const InputVec& u, const DisturbanceVec& d,
               const RobotParams& params);

/// Control-affine decomposition xdot = f(x) + G_u(x) u + G_d(x) d.
struct StructuredDynamics {
  StateVec f;
  InputGainMat G_u;
  DisturbanceGainMat G_d;
};

StructuredDynamics structured_form(const StateVec& x,
                                   const RobotParams& params);

/// Jacobians of f_sys at a given evaluation point.
struct LinearizedModel {
  StateMat A;
  InputGainMat B_u;
  DisturbanceGainMat B_d;
  StateVec x0;
  InputVec u0;
  DisturbanceVec d0;
};

enum class LinearizationMethod { kAnalytic, kFiniteDifference };

LinearizedModel linearize(const StateVec& x, const InputVec& u,
                          const DisturbanceVec& d, const RobotParams& params,
                          LinearizationMethod method =
                              LinearizationMethod::kAnalytic);

/// One classical RK4 step of f_sys with u and d held constant.
StateVec integrate_rk4(const StateVec& x, const InputVec& u,
                       const DisturbanceVec& d, const RobotParams& params,
                       double dt);

/// RK4 over dt split into `substeps` equal stages.
StateVec integrate_rk4(const StateVec& x, const InputVec& u,
                       const DisturbanceVec& d, const RobotParams& params,
                       double dt, int substeps);

}  // namespace sttw
