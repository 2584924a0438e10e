#include "sttw/observer.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "sttw/dynamics.hpp"
#include "sttw/errors.hpp"
#include "sttw/riccati.hpp"

namespace sttw {

void ObserverConfig::validate() const {
  if (!(dt > 0.0)) {
    throw ConfigError("observer dt must be positive");
  }
  if ((q_process.array() < 0.0).any()) {
    throw ConfigError("observer process noise must be nonnegative");
  }
  if ((r_measurement.array() <= 0.0).any()) {
    throw ConfigError("observer measurement noise must be positive definite");
  }
}

ExtendedMeasMat extended_measurement_matrix() {
  ExtendedMeasMat c;
  c.setZero();
  c.block<kMeasDim, kStateDim>(0, 0) = measurement_matrix();
  return c;
}

ExtendedVec extended_dynamics(const ExtendedVec& xbar, const InputVec& u,
                              const RobotParams& params) {
  const StateVec x = xbar.head<kStateDim>();
  const DisturbanceVec d = xbar.tail<kDisturbanceDim>();
  ExtendedVec out;
  out.head<kStateDim>() = f_sys(x, u, d, params);
  out.tail<kDisturbanceDim>().setZero();
  return out;
}

MeasVec measure(const StateVec& x) { return x.head<kMeasDim>(); }

ExtendedMat extended_jacobian(const ExtendedVec& xbar, const InputVec& u,
                              const RobotParams& params) {
  const StateVec x = xbar.head<kStateDim>();
  const DisturbanceVec d = xbar.tail<kDisturbanceDim>();
  const LinearizedModel lin = linearize(x, u, d, params);
  ExtendedMat A;
  A.setZero();
  A.block<kStateDim, kStateDim>(0, 0) = lin.A;
  A.block<kStateDim, kDisturbanceDim>(0, kStateDim) = lin.B_d;
  return A;
}

Eigen::MatrixXd discretize_transition(const Eigen::MatrixXd& A_continuous,
                                      double dt) {
  const Eigen::MatrixXd Adt = A_continuous * dt;
  return Eigen::MatrixXd::Identity(A_continuous.rows(), A_continuous.cols()) +
         Adt + 0.5 * Adt * Adt;
}

SteadyStateGain steady_state_gain(const Eigen::MatrixXd& F,
                                  const Eigen::MatrixXd& C,
                                  const Eigen::MatrixXd& Q,
                                  const Eigen::MatrixXd& R) {
  SteadyStateGain out;
  try {
    // Filter DARE by duality with the control form.
    out.P = dare_solve(F.transpose(), C.transpose(), Q, R);
  } catch (const SolverError& e) {
    throw ConfigError(std::string("steady-state observer gain: ") + e.what());
  }
  const Eigen::MatrixXd S = C * out.P * C.transpose() + R;
  out.L = (S.ldlt().solve(C * out.P)).transpose();
  return out;
}

ExtendedEstimate initial_estimate(const MeasVec& y,
                                  const ObserverConfig& config) {
  ExtendedEstimate est;
  est.xbar.setZero();
  est.xbar.head<kMeasDim>() = y;
  est.P = config.p_initial.asDiagonal();
  return est;
}

namespace {

ExtendedVec predict_rk4(const ExtendedVec& xbar, const InputVec& u,
                        const RobotParams& params, double dt) {
  const ExtendedVec k1 = extended_dynamics(xbar, u, params);
  const ExtendedVec k2 = extended_dynamics(xbar + 0.5 * dt * k1, u, params);
  const ExtendedVec k3 = extended_dynamics(xbar + 0.5 * dt * k2, u, params);
  const ExtendedVec k4 = extended_dynamics(xbar + dt * k3, u, params);
  return xbar + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void enforce_positive_definite(ExtendedEstimate& est) {
  est.P = 0.5 * (est.P + est.P.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<ExtendedMat> eig(est.P);
  if (eig.eigenvalues().minCoeff() > 0.0) {
    return;
  }
  if (est.recovered_once) {
    throw NumericalError("observer covariance lost positive definiteness "
                         "twice; aborting");
  }
  est.recovered_once = true;
  Eigen::Matrix<double, kExtendedDim, 1> floored =
      eig.eigenvalues().cwiseMax(1e-12);
  est.P = eig.eigenvectors() * floored.asDiagonal() *
          eig.eigenvectors().transpose();
}

}  // namespace

ExtendedEstimate observer_step(const ExtendedEstimate& estimate,
                               const InputVec& u, const MeasVec& y,
                               const ObserverConfig& config,
                               const RobotParams& params) {
  ExtendedEstimate est = estimate;
  const ExtendedMat A = extended_jacobian(est.xbar, u, params);
  const ExtendedMat F = discretize_transition(A, config.dt);
  const ExtendedMeasMat C = extended_measurement_matrix();

  // Predict.
  const ExtendedVec xbar_pred = predict_rk4(est.xbar, u, params, config.dt);

  if (config.mode == ObserverMode::kSteadyStateGain) {
    const bool stale =
        !est.has_gain ||
        (est.xbar - est.gain_point).lpNorm<Eigen::Infinity>() >
            config.gain_refresh_threshold;
    if (stale) {
      const SteadyStateGain ss = steady_state_gain(F, C, config.Q(), config.R());
      est.gain = ss.L;
      est.P = ss.P;
      est.gain_point = est.xbar;
      est.has_gain = true;
    }
  } else {
    est.P = F * est.P * F.transpose() + ExtendedMat(config.Q());
    const Eigen::Matrix<double, kMeasDim, kMeasDim> S =
        C * est.P * C.transpose() +
        Eigen::Matrix<double, kMeasDim, kMeasDim>(config.R());
    est.gain = (S.ldlt().solve(C * est.P)).transpose();
    // Joseph-form update keeps the covariance symmetric PSD.
    const ExtendedMat IKC = ExtendedMat::Identity() - est.gain * C;
    est.P = IKC * est.P * IKC.transpose() +
            est.gain * Eigen::Matrix<double, kMeasDim, kMeasDim>(config.R()) *
                est.gain.transpose();
  }

  // Correct through the measurement residual.
  const MeasVec residual = y - C * xbar_pred;
  est.xbar = xbar_pred + est.gain * residual;

  if (!est.xbar.allFinite()) {
    throw NumericalError("observer state became non-finite");
  }
  enforce_positive_definite(est);
  return est;
}

}  // namespace sttw
