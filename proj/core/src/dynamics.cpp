#include "sttw/dynamics.hpp"

#include <cmath>
#include <numbers>

#include "sttw/errors.hpp"

namespace sttw {

namespace {
constexpr double kHalfPi = std::numbers::pi / 2.0;
}

void check_angle_domain(double delta, double phi) {
  if (!(std::abs(delta) < kHalfPi - kAngleDomainMargin)) {
    throw DomainError("steering angle outside model domain (|delta| too "
                      "close to pi/2)");
  }
  if (!(std::abs(phi) < kHalfPi - kAngleDomainMargin)) {
    throw DomainError("roll angle outside model domain (|phi| too close to "
                      "pi/2)");
  }
}

double delta_projection(double delta, double phi, const RobotParams& params) {
  check_angle_domain(delta, phi);
  return std::atan(std::tan(delta) * std::cos(params.lambda) / std::cos(phi));
}

double trail_length(double delta, const RobotParams& params) {
  return params.c + params.r * std::tan(params.lambda) * (std::cos(delta) - 1.0);
}

double yaw_deviation(double delta, double phi, const RobotParams& params) {
  return trail_length(delta, params) / params.b *
         std::sin(delta_projection(delta, phi, params));
}

std::optional<double> turning_radius(double delta, double phi,
                                     const RobotParams& params) {
  const double dp = delta_projection(delta, phi, params);
  if (dp == 0.0) {
    return std::nullopt;  // straight line
  }
  return params.b / std::tan(dp);
}

double lateral_acceleration(const StateVec& x, double v_r_dot,
                            double delta_dot, const RobotParams& params) {
  const double v_r = x[kIdxVr];
  const double delta = x[kIdxDelta];
  const double phi = x[kIdxPhi];
  const double phi_dot = x[kIdxPhiDot];
  check_angle_domain(delta, phi);

  const double tan_delta = std::tan(delta);
  const double cos_delta = std::cos(delta);
  const double cos_phi = std::cos(phi);
  const double tan_phi = std::tan(phi);
  const double cos_lambda = std::cos(params.lambda);
  const double a = params.a;
  const double b = params.b;

  const double centrifugal = v_r * v_r * tan_delta * cos_lambda / (b * cos_phi);
  const double accel_steer = a * cos_lambda / (b * cos_phi) *
                             (v_r_dot * tan_delta +
                              v_r * delta_dot / (cos_delta * cos_delta));
  const double roll_coupling =
      a * v_r * tan_delta * cos_lambda * tan_phi / (b * cos_phi) * phi_dot;
  return centrifugal + accel_steer + roll_coupling;
}

StateVec f_sys(const StateVec& x, const InputVec& u, const DisturbanceVec& d,
               const RobotParams& params) {
  const double v_r = x[kIdxVr];
  const double delta = x[kIdxDelta];
  const double phi = x[kIdxPhi];
  const double phi_dot = x[kIdxPhiDot];
  const double tau_r = u[kIdxTauR];
  const double delta_dot = u[kIdxDeltaDot];
  const double d_r = d[kIdxDr];
  const double d_phi = d[kIdxDPhi];
  check_angle_domain(delta, phi);

  const double tan_delta = std::tan(delta);
  const double cos_delta = std::cos(delta);
  const double cos_phi = std::cos(phi);
  const double sin_phi = std::sin(phi);
  const double cos_lambda = std::cos(params.lambda);
  const double a = params.a;
  const double b = params.b;
  const double c = params.c;
  const double m = params.m;
  const double h = params.h;
  const double g = params.g;
  const double J_w = params.drivetrain_inertia();

  StateVec xdot;
  xdot[kIdxS] = v_r;
  xdot[kIdxVr] = params.beta2() * (tau_r + d_r);
  xdot[kIdxDelta] = delta_dot;
  xdot[kIdxPhi] = phi_dot;

  const double inertial_torque =
      m * h * cos_phi * cos_lambda *
      (tan_delta * v_r * v_r / b + (a / b) * tan_delta * (tau_r + d_r) / J_w +
       (a / b) * delta_dot * v_r / (cos_delta * cos_delta));
  const double steer_gravity = m * g * (a * c / b) * cos_lambda * delta;
  const double roll_gravity = m * g * h * sin_phi;
  xdot[kIdxPhiDot] =
      params.beta5() * (inertial_torque - steer_gravity + roll_gravity + d_phi);
  return xdot;
}

StructuredDynamics structured_form(const StateVec& x,
                                   const RobotParams& params) {
  const double v_r = x[kIdxVr];
  const double delta = x[kIdxDelta];
  const double phi = x[kIdxPhi];
  check_angle_domain(delta, phi);

  const double tan_delta = std::tan(delta);
  const double cos_delta = std::cos(delta);
  const double cos_phi = std::cos(phi);
  const double sin_phi = std::sin(phi);
  const double cos_lambda = std::cos(params.lambda);
  const double a = params.a;
  const double b = params.b;
  const double c = params.c;
  const double m = params.m;
  const double h = params.h;
  const double g = params.g;
  const double beta2 = params.beta2();
  const double beta5 = params.beta5();
  const double J_w = params.drivetrain_inertia();

  // beta1 keeps only the input-free part of the roll row; the delta_dot v_r
  // coupling lives in beta4 so that f + G_u u + G_d d == f_sys exactly.
  const double beta1 =
      beta5 * (m * h * cos_phi * cos_lambda * tan_delta * v_r * v_r / b -
               m * g * (a * c / b) * cos_lambda * delta + m * g * h * sin_phi);
  const double beta3 =
      a * m * h * cos_phi * cos_lambda * tan_delta / (b * J_w) * beta5;
  const double beta4 = a * m * h * cos_phi * cos_lambda * v_r /
                       (b * cos_delta * cos_delta) * beta5;

  StructuredDynamics out;
  out.f << v_r, 0.0, 0.0, x[kIdxPhiDot], beta1;
  out.G_u.setZero();
  out.G_u(kIdxVr, kIdxTauR) = beta2;
  out.G_u(kIdxDelta, kIdxDeltaDot) = 1.0;
  out.G_u(kIdxPhiDot, kIdxTauR) = beta3;
  out.G_u(kIdxPhiDot, kIdxDeltaDot) = beta4;
  out.G_d.setZero();
  out.G_d(kIdxVr, kIdxDr) = beta2;
  out.G_d(kIdxPhiDot, kIdxDr) = beta3;
  out.G_d(kIdxPhiDot, kIdxDPhi) = beta5;
  return out;
}

namespace {

LinearizedModel linearize_analytic(const StateVec& x, const InputVec& u,
                                   const DisturbanceVec& d,
                                   const RobotParams& params) {
  const double v_r = x[kIdxVr];
  const double delta = x[kIdxDelta];
  const double phi = x[kIdxPhi];
  const double tau_r = u[kIdxTauR];
  const double delta_dot = u[kIdxDeltaDot];
  const double d_r = d[kIdxDr];
  check_angle_domain(delta, phi);

  const double tan_delta = std::tan(delta);
  const double cos_delta = std::cos(delta);
  const double sec2_delta = 1.0 / (cos_delta * cos_delta);
  const double cos_phi = std::cos(phi);
  const double sin_phi = std::sin(phi);
  const double cos_lambda = std::cos(params.lambda);
  const double a = params.a;
  const double b = params.b;
  const double c = params.c;
  const double m = params.m;
  const double h = params.h;
  const double g = params.g;
  const double beta5 = params.beta5();
  const double J_w = params.drivetrain_inertia();

  LinearizedModel lin;
  lin.x0 = x;
  lin.u0 = u;
  lin.d0 = d;
  lin.A.setZero();
  lin.A(kIdxS, kIdxVr) = 1.0;
  lin.A(kIdxPhi, kIdxPhiDot) = 1.0;

  // Bracketed torque sum of the roll row, before the beta5 scaling.
  const double bracket =
      tan_delta * v_r * v_r / b + (a / b) * tan_delta * (tau_r + d_r) / J_w +
      (a / b) * delta_dot * v_r * sec2_delta;

  lin.A(kIdxPhiDot, kIdxVr) =
      beta5 * m * h * cos_phi * cos_lambda *
      (2.0 * tan_delta * v_r / b + (a / b) * delta_dot * sec2_delta);
  lin.A(kIdxPhiDot, kIdxDelta) =
      beta5 *
      (m * h * cos_phi * cos_lambda *
           (sec2_delta * v_r * v_r / b + (a / b) * sec2_delta * (tau_r + d_r) / J_w +
            (a / b) * delta_dot * v_r * 2.0 * sec2_delta * tan_delta) -
       m * g * (a * c / b) * cos_lambda);
  lin.A(kIdxPhiDot, kIdxPhi) =
      beta5 * (-m * h * sin_phi * cos_lambda * bracket + m * g * h * cos_phi);

  const StructuredDynamics sd = structured_form(x, params);
  lin.B_u = sd.G_u;
  lin.B_d = sd.G_d;
  return lin;
}

LinearizedModel linearize_finite_difference(const StateVec& x,
                                            const InputVec& u,
                                            const DisturbanceVec& d,
                                            const RobotParams& params) {
  LinearizedModel lin;
  lin.x0 = x;
  lin.u0 = u;
  lin.d0 = d;
  auto step = [](double v) { return 1e-6 * std::max(1.0, std::abs(v)); };
  for (int j = 0; j < kStateDim; ++j) {
    const double eps = step(x[j]);
    StateVec xp = x, xm = x;
    xp[j] += eps;
    xm[j] -= eps;
    lin.A.col(j) = (f_sys(xp, u, d, params) - f_sys(xm, u, d, params)) /
                   (2.0 * eps);
  }
  for (int j = 0; j < kInputDim; ++j) {
    const double eps = step(u[j]);
    InputVec up = u, um = u;
    up[j] += eps;
    um[j] -= eps;
    lin.B_u.col(j) = (f_sys(x, up, d, params) - f_sys(x, um, d, params)) /
                     (2.0 * eps);
  }
  for (int j = 0; j < kDisturbanceDim; ++j) {
    const double eps = step(d[j]);
    DisturbanceVec dp = d, dm = d;
    dp[j] += eps;
    dm[j] -= eps;
    lin.B_d.col(j) = (f_sys(x, u, dp, params) - f_sys(x, u, dm, params)) /
                     (2.0 * eps);
  }
  return lin;
}

}  // namespace

LinearizedModel linearize(const StateVec& x, const InputVec& u,
                          const DisturbanceVec& d, const RobotParams& params,
                          LinearizationMethod method) {
  if (method == LinearizationMethod::kAnalytic) {
    return linearize_analytic(x, u, d, params);
  }
  return linearize_finite_difference(x, u, d, params);
}

StateVec integrate_rk4(const StateVec& x, const InputVec& u,
                       const DisturbanceVec& d, const RobotParams& params,
                       double dt) {
  const StateVec k1 = f_sys(x, u, d, params);
  const StateVec k2 = f_sys(x + 0.5 * dt * k1, u, d, params);
  const StateVec k3 = f_sys(x + 0.5 * dt * k2, u, d, params);
  const StateVec k4 = f_sys(x + dt * k3, u, d, params);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

StateVec integrate_rk4(const StateVec& x, const InputVec& u,
                       const DisturbanceVec& d, const RobotParams& params,
                       double dt, int substeps) {
  StateVec out = x;
  const double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) {
    out = integrate_rk4(out, u, d, params, h);
  }
  return out;
}

}  // namespace sttw
