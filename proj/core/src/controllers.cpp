#include "sttw/controllers.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <sstream>

#include "sttw/errors.hpp"
#include "sttw/riccati.hpp"

namespace sttw {

ControllerVariant controller_variant_from_string(const std::string& name) {
  if (name == "eabc") return ControllerVariant::kEabc;
  if (name == "ecbc") return ControllerVariant::kEcbc;
  if (name == "impc") return ControllerVariant::kImpc;
  if (name == "mpc") return ControllerVariant::kMpc;
  throw ConfigError("unknown controller variant '" + name +
                    "' (expected eabc, ecbc, impc or mpc)");
}

std::string to_string(ControllerVariant variant) {
  switch (variant) {
    case ControllerVariant::kEabc: return "eabc";
    case ControllerVariant::kEcbc: return "ecbc";
    case ControllerVariant::kImpc: return "impc";
    case ControllerVariant::kMpc: return "mpc";
  }
  return "unknown";
}

void ControllerConfig::validate() const {
  ocp.validate();
  observer.validate();
  if (!(solve_period > 0.0) || !(feedback_period > 0.0)) {
    throw ConfigError("controller periods must be positive");
  }
  const double ratio = solve_period / feedback_period;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw ConfigError("solve_period must be an integer multiple of "
                      "feedback_period");
  }
  if (!(integrator_weight >= 0.0) || !(integrator_limit > 0.0)) {
    throw ConfigError("integrator weight/limit must be nonnegative/positive");
  }
}

TrackStandController::TrackStandController(const ControllerConfig& config,
                                           const RobotParams& params)
    : config_(config), params_(params) {
  config_.validate();
  params_.validate();
  ticks_per_solve_ = static_cast<int>(
      std::llround(config_.solve_period / config_.feedback_period));
}

EquilibriumPoint ecbc_equilibrium_shift(const Reference& ref,
                                        const DisturbanceVec& d_hat,
                                        const RobotParams& params) {
  const EquilibriumPoint nominal =
      track_stand_equilibrium(ref, DisturbanceVec::Zero(), params);
  const LinearizedModel lin =
      linearize(nominal.x_e, nominal.u_e, DisturbanceVec::Zero(), params);

  constexpr int n = kStateDim + kInputDim;
  Eigen::Matrix<double, n, n> J;
  J.setZero();
  J.block<kStateDim, kStateDim>(0, 0) = lin.A;
  J.block<kStateDim, kInputDim>(0, kStateDim) = lin.B_u;
  J.block<kOutputDim, kStateDim>(kStateDim, 0) = output_matrix();
  Eigen::Matrix<double, n, 1> rhs;
  rhs.setZero();
  rhs.head<kStateDim>() = -lin.B_d * d_hat;

  Eigen::FullPivLU<Eigen::Matrix<double, n, n>> lu(J);
  if (!lu.isInvertible()) {
    throw SolverError("ecbc: linear equilibrium system is singular");
  }
  const Eigen::Matrix<double, n, 1> shift = lu.solve(rhs);

  EquilibriumPoint eq;
  eq.x_e = nominal.x_e + shift.head<kStateDim>();
  eq.u_e = nominal.u_e + shift.tail<kInputDim>();
  eq.residual = equilibrium_residual(eq.x_e, eq.u_e, d_hat, ref, params)
                    .lpNorm<Eigen::Infinity>();
  eq.feasible = true;  // the linear shift always exists; bias is its price
  return eq;
}

EquilibriumPoint TrackStandController::equilibrium_for(
    const Reference& ref, const DisturbanceVec& d_hat) {
  switch (config_.variant) {
    case ControllerVariant::kEabc:
      return track_stand_equilibrium(ref, d_hat, params_);
    case ControllerVariant::kEcbc:
      return ecbc_equilibrium_shift(ref, d_hat, params_);
    case ControllerVariant::kImpc:
    case ControllerVariant::kMpc:
      return track_stand_equilibrium(ref, DisturbanceVec::Zero(), params_);
  }
  throw ConfigError("invalid controller variant");
}

const Eigen::MatrixXd& TrackStandController::terminal_weight(
    const Reference& ref, bool augmented) {
  if (terminal_cache_delta_ == ref.delta && terminal_cache_.size() > 0) {
    return terminal_cache_;
  }
  const EquilibriumPoint nominal =
      track_stand_equilibrium(ref, DisturbanceVec::Zero(), params_);
  const double node_dt = config_.ocp.horizon / config_.ocp.nodes;

  if (!config_.ocp.terminal_from_riccati) {
    if (augmented) {
      throw ConfigError("impc requires terminal_from_riccati");
    }
    terminal_cache_ = config_.ocp.h_diag.asDiagonal();
    terminal_cache_delta_ = ref.delta;
    return terminal_cache_;
  }

  Eigen::VectorXd x_eq;
  Eigen::MatrixXd Q;
  std::unique_ptr<ControlledSystem> system;
  if (augmented) {
    x_eq.setZero(kStateDim + kOutputDim);
    x_eq.head<kStateDim>() = nominal.x_e;
    system = std::make_unique<IntegratorAugmentedSystem>(
        params_, output_matrix() * nominal.x_e);
    Q.setZero(kStateDim + kOutputDim, kStateDim + kOutputDim);
    Q.topLeftCorner<kStateDim, kStateDim>() = config_.ocp.Q();
    Q.bottomRightCorner<kOutputDim, kOutputDim>() =
        config_.integrator_weight *
        Eigen::Matrix<double, kOutputDim, kOutputDim>::Identity();
  } else {
    x_eq = nominal.x_e;
    system = std::make_unique<DisturbedTrackStandSystem>(
        params_, DisturbanceVec::Zero());
    Q = config_.ocp.Q();
  }

  Eigen::VectorXd x_next;
  Eigen::MatrixXd Ad, Bd;
  discrete_step_with_jacobians(*system, x_eq, nominal.u_e, node_dt,
                               config_.ocp.rk4_substeps, x_next, Ad, Bd);
  terminal_cache_ =
      dare_solve(Ad, Bd, Q * node_dt, config_.ocp.R() * node_dt);
  terminal_cache_delta_ = ref.delta;
  return terminal_cache_;
}

void TrackStandController::solve(const StateVec& x_hat,
                                 const DisturbanceVec& d_hat,
                                 const Reference& ref) {
  GnmsProblem problem;
  problem.horizon = config_.ocp.horizon;
  problem.nodes = config_.ocp.nodes;
  problem.rk4_substeps = config_.ocp.rk4_substeps;
  // The cold first solve has no warm start to lean on; let it converge.
  problem.max_iterations =
      law_.empty() ? std::max(config_.ocp.max_iterations, 30)
                   : config_.ocp.max_iterations;
  problem.step_tolerance = config_.ocp.step_tolerance;
  problem.R = config_.ocp.R();

  std::unique_ptr<ControlledSystem> system;
  Eigen::VectorXd x0;
  const bool augmented = config_.variant == ControllerVariant::kImpc;
  if (augmented) {
    system = std::make_unique<IntegratorAugmentedSystem>(params_, ref.vec());
    x0.setZero(kStateDim + kOutputDim);
    x0.head<kStateDim>() = x_hat;
    x0.tail<kOutputDim>() = integrator_;
    problem.Q.setZero(kStateDim + kOutputDim, kStateDim + kOutputDim);
    problem.Q.topLeftCorner<kStateDim, kStateDim>() = config_.ocp.Q();
    problem.Q.bottomRightCorner<kOutputDim, kOutputDim>() =
        config_.integrator_weight *
        Eigen::Matrix<double, kOutputDim, kOutputDim>::Identity();
    problem.x_target.setZero(kStateDim + kOutputDim);
    problem.x_target.head<kStateDim>() = equilibrium_.x_e;
    problem.u_target = equilibrium_.u_e;
  } else {
    const DisturbanceVec d_model =
        config_.variant == ControllerVariant::kMpc ? DisturbanceVec::Zero()
                                                   : d_hat;
    system = std::make_unique<DisturbedTrackStandSystem>(params_, d_model);
    x0 = x_hat;
    problem.Q = config_.ocp.Q();
    problem.x_target = equilibrium_.x_e;
    problem.u_target = equilibrium_.u_e;
  }
  problem.H = terminal_weight(ref, augmented);

  const ControlLaw warm = law_.shifted(config_.solve_period);
  const GnmsResult result =
      gnms_solve(*system, x0, problem, law_.empty() ? nullptr : &warm);
  law_ = result.law;
  stats_.iterations = result.stats.iterations;
  stats_.cost = result.stats.cost;
  stats_.step_norm = result.stats.step_norm;
}

void TrackStandController::set_estimate(const ExtendedEstimate& estimate) {
  estimate_ = estimate;
  estimate_ready_ = true;
}

InputVec TrackStandController::update(double t, const MeasVec& y,
                                      const Reference& ref,
                                      const StateVec* true_state) {
  if (!estimate_ready_) {
    estimate_ = initial_estimate(y, config_.observer);
    estimate_ready_ = true;
  } else {
    estimate_ =
        observer_step(estimate_, u_prev_, y, config_.observer, params_);
  }

  StateVec x_hat = estimate_.state();
  if (config_.use_true_state && true_state != nullptr) {
    x_hat = *true_state;
  }
  const DisturbanceVec d_hat = estimate_.disturbance();

  if (config_.variant == ControllerVariant::kImpc) {
    integrator_ += (output_matrix() * x_hat - ref.vec()) *
                   config_.feedback_period;
    integrator_ = integrator_.cwiseMax(-config_.integrator_limit)
                      .cwiseMin(config_.integrator_limit);
  }

  if (tick_ % ticks_per_solve_ == 0 || law_.empty()) {
    equilibrium_ = equilibrium_for(ref, d_hat);
    solve(x_hat, d_hat, ref);
  }
  ++tick_;

  Eigen::VectorXd x_fb;
  if (config_.variant == ControllerVariant::kImpc) {
    x_fb.setZero(kStateDim + kOutputDim);
    x_fb.head<kStateDim>() = x_hat;
    x_fb.tail<kOutputDim>() = integrator_;
  } else {
    x_fb = x_hat;
  }
  const InputVec u = law_.feedback(x_fb);
  if (!u.allFinite()) {
    throw SolverError("controller produced a non-finite input");
  }
  u_prev_ = u;
  return u;
}

}  // namespace sttw
