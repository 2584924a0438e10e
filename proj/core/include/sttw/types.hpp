#pragma once

#include <Eigen/Core>

namespace sttw {

inline constexpr int kStateDim = 5;        ///< [s, v_r, delta, phi, phi_dot]
inline constexpr int kInputDim = 2;        ///< [tau_r, delta_dot]
inline constexpr int kDisturbanceDim = 2;  ///< [d_r, d_phi]
inline constexpr int kMeasDim = 4;         ///< [s, v_r, delta, phi]
inline constexpr int kOutputDim = 2;       ///< [s, delta]
inline constexpr int kExtendedDim = kStateDim + kDisturbanceDim;

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using InputVec = Eigen::Matrix<double, kInputDim, 1>;
using DisturbanceVec = Eigen::Matrix<double, kDisturbanceDim, 1>;
using MeasVec = Eigen::Matrix<double, kMeasDim, 1>;
using OutputVec = Eigen::Matrix<double, kOutputDim, 1>;
using ExtendedVec = Eigen::Matrix<double, kExtendedDim, 1>;

using StateMat = Eigen::Matrix<double, kStateDim, kStateDim>;
using InputGainMat = Eigen::Matrix<double, kStateDim, kInputDim>;
using DisturbanceGainMat = Eigen::Matrix<double, kStateDim, kDisturbanceDim>;

enum StateIndex { kIdxS = 0, kIdxVr, kIdxDelta, kIdxPhi, kIdxPhiDot };
enum InputIndex { kIdxTauR = 0, kIdxDeltaDot };
enum DisturbanceIndex { kIdxDr = 0, kIdxDPhi };

/// Measurement map C_m: y_m = [s, v_r, delta, phi] (roll rate is not sensed).
inline Eigen::Matrix<double, kMeasDim, kStateDim> measurement_matrix() {
  Eigen::Matrix<double, kMeasDim, kStateDim> cm;
  cm.setZero();
  cm.block<kMeasDim, kMeasDim>(0, 0).setIdentity();
  return cm;
}

/// Controlled-output map C_o: y_o = [s, delta].
inline Eigen::Matrix<double, kOutputDim, kStateDim> output_matrix() {
  Eigen::Matrix<double, kOutputDim, kStateDim> co;
  co.setZero();
  co(0, kIdxS) = 1.0;
  co(1, kIdxDelta) = 1.0;
  return co;
}

/// Tracking reference for the track stand: rear position and steering angle.
struct Reference {
  double s = 0.0;      ///< rear position reference [m]
  double delta = 0.0;  ///< steering angle reference [rad]

  OutputVec vec() const { return OutputVec(s, delta); }
};

}  // namespace sttw
