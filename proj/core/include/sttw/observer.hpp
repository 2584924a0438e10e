#pragma once

#include "sttw/robot_params.hpp"
#include "sttw/types.hpp"

namespace sttw {

using ExtendedMat = Eigen::Matrix<double, kExtendedDim, kExtendedDim>;
using ObserverGainMat = Eigen::Matrix<double, kExtendedDim, kMeasDim>;
using ExtendedMeasMat = Eigen::Matrix<double, kMeasDim, kExtendedDim>;

enum class ObserverMode { kFilteredCovariance, kSteadyStateGain };

/// Joint state-and-disturbance observer settings. The covariances are
/// discrete, per update step.
struct ObserverConfig {
  Eigen::Matrix<double, kExtendedDim, 1> q_process =
      (Eigen::Matrix<double, kExtendedDim, 1>() << 1e-6, 1e-4, 1e-6, 1e-5,
       1e-3, 1e-2, 1e-2)
          .finished();
  Eigen::Matrix<double, kMeasDim, 1> r_measurement =
      (Eigen::Matrix<double, kMeasDim, 1>() << 1e-6, 1e-5, 1e-6, 1e-6)
          .finished();
  Eigen::Matrix<double, kExtendedDim, 1> p_initial =
      (Eigen::Matrix<double, kExtendedDim, 1>() << 1e-4, 1e-4, 1e-4, 1e-4,
       1e-4, 1e-2, 1e-2)
          .finished();
  double dt = 0.005;  ///< update period (200 Hz feedback rate)
  ObserverMode mode = ObserverMode::kSteadyStateGain;
  /// Steady-state gain is refreshed when the linearization point moves by
  /// more than this (inf-norm).
  double gain_refresh_threshold = 0.05;

  Eigen::Matrix<double, kExtendedDim, kExtendedDim> Q() const {
    return q_process.asDiagonal();
  }
  Eigen::Matrix<double, kMeasDim, kMeasDim> R() const {
    return r_measurement.asDiagonal();
  }

  void validate() const;
};

/// Value-semantic estimator state: the extended estimate [x_hat; d_hat],
/// its covariance, and the cached observer gain with the linearization
/// point it was computed at.
struct ExtendedEstimate {
  ExtendedVec xbar = ExtendedVec::Zero();
  ExtendedMat P = ExtendedMat::Identity();
  ObserverGainMat gain = ObserverGainMat::Zero();
  ExtendedVec gain_point = ExtendedVec::Zero();
  bool has_gain = false;
  bool recovered_once = false;  ///< covariance PD recovery already spent

  Eigen::Map<const StateVec> state() const {
    return Eigen::Map<const StateVec>(xbar.data());
  }
  Eigen::Map<const DisturbanceVec> disturbance() const {
    return Eigen::Map<const DisturbanceVec>(xbar.data() + kStateDim);
  }
};

/// Extended measurement map [C_m, 0].
ExtendedMeasMat extended_measurement_matrix();

/// Extended vector field [f + G_u u + G_d d; 0]: the observer's internal
/// model treats the disturbance as constant.
ExtendedVec extended_dynamics(const ExtendedVec& xbar, const InputVec& u,
                              const RobotParams& params);

/// Sensor model: y = [s, v_r, delta, phi].
MeasVec measure(const StateVec& x);

/// Continuous-time Jacobian of the extended dynamics wrt the extended state.
ExtendedMat extended_jacobian(const ExtendedVec& xbar, const InputVec& u,
                              const RobotParams& params);

/// Second-order Taylor discretization I + A dt + (A dt)^2 / 2.
Eigen::MatrixXd discretize_transition(const Eigen::MatrixXd& A_continuous,
                                      double dt);

/// Steady-state Kalman gain for the discrete pair (F, C) from the
/// stabilizing DARE solution. Dimensions are generic so small test systems
/// can reuse it. Throws ConfigError when the Riccati iteration does not
/// converge (undetectable pair).
struct SteadyStateGain {
  Eigen::MatrixXd L;  ///< filter gain, n x m
  Eigen::MatrixXd P;  ///< a-priori error covariance (DARE solution)
};

SteadyStateGain steady_state_gain(const Eigen::MatrixXd& F,
                                  const Eigen::MatrixXd& C,
                                  const Eigen::MatrixXd& Q,
                                  const Eigen::MatrixXd& R);

/// Initial estimate from a first measurement: unmeasured states and the
/// disturbance start at zero.
ExtendedEstimate initial_estimate(const MeasVec& y,
                                  const ObserverConfig& config);

/// One discrete EKF update: RK4 predict on the extended model, covariance
/// propagation through the linearized transition, then the measurement
/// correction with either the filtered or the cached steady-state gain.
ExtendedEstimate observer_step(const ExtendedEstimate& estimate,
                               const InputVec& u, const MeasVec& y,
                               const ObserverConfig& config,
                               const RobotParams& params);

}  // namespace sttw
