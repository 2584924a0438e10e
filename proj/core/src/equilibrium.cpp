#include "sttw/equilibrium.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sttw/errors.hpp"

namespace sttw {

namespace {
constexpr int kEqDim = kStateDim + kOutputDim;
using ResidualVec = Eigen::Matrix<double, kEqDim, 1>;
using EqJacobian = Eigen::Matrix<double, kEqDim, kEqDim>;

// Iterates must stay strictly inside the dynamics domain guard.
constexpr double kIterateAngleBound =
    std::numbers::pi / 2.0 - 2.0 * kAngleDomainMargin;

EqJacobian equilibrium_jacobian(const StateVec& x, const InputVec& u,
                                const DisturbanceVec& d_hat,
                                const RobotParams& params) {
  const LinearizedModel lin = linearize(x, u, d_hat, params);
  EqJacobian J;
  J.setZero();
  J.block<kStateDim, kStateDim>(0, 0) = lin.A;
  J.block<kStateDim, kInputDim>(0, kStateDim) = lin.B_u;
  J.block<kOutputDim, kStateDim>(kStateDim, 0) = output_matrix();
  return J;
}

}  // namespace

ResidualVec equilibrium_residual(const StateVec& x_e, const InputVec& u_e,
                                 const DisturbanceVec& d_hat,
                                 const Reference& ref,
                                 const RobotParams& params) {
  ResidualVec F;
  F.head<kStateDim>() = f_sys(x_e, u_e, d_hat, params);
  F.tail<kOutputDim>() = output_matrix() * x_e - ref.vec();
  return F;
}

double roll_equilibrium_sine(const Reference& ref, const DisturbanceVec& d_hat,
                             const RobotParams& params) {
  const double steer_gravity = params.m * params.g *
                               (params.a * params.c / params.b) *
                               std::cos(params.lambda) * ref.delta;
  return (steer_gravity - d_hat[kIdxDPhi]) / (params.m * params.g * params.h);
}

bool track_stand_feasible(const Reference& ref, const DisturbanceVec& d_hat,
                          const RobotParams& params) {
  const double arg = roll_equilibrium_sine(ref, d_hat, params);
  // The equilibrium roll angle must also respect the model domain guard.
  return std::abs(arg) < std::sin(std::numbers::pi / 2.0 - kAngleDomainMargin);
}

EquilibriumPoint track_stand_equilibrium(const Reference& ref,
                                         const DisturbanceVec& d_hat,
                                         const RobotParams& params) {
  const double arg = roll_equilibrium_sine(ref, d_hat, params);
  if (!track_stand_feasible(ref, d_hat, params)) {
    std::ostringstream msg;
    msg << "balance impossible under estimated disturbance: asin argument "
        << arg << " outside the feasible roll range";
    throw InfeasibleEquilibrium(msg.str());
  }
  EquilibriumPoint eq;
  eq.x_e << ref.s, 0.0, ref.delta, std::asin(arg), 0.0;
  eq.u_e << -d_hat[kIdxDr], 0.0;
  eq.residual = equilibrium_residual(eq.x_e, eq.u_e, d_hat, ref, params)
                    .lpNorm<Eigen::Infinity>();
  eq.feasible = eq.residual < 1e-9;
  return eq;
}

EquilibriumPoint solve_equilibrium_newton(const Reference& ref,
                                          const DisturbanceVec& d_hat,
                                          const RobotParams& params,
                                          const StateVec& x0,
                                          const InputVec& u0, double tol,
                                          int max_iterations) {
  StateVec x = x0;
  InputVec u = u0;
  ResidualVec F = equilibrium_residual(x, u, d_hat, ref, params);
  for (int iter = 0; iter < max_iterations; ++iter) {
    if (F.lpNorm<Eigen::Infinity>() < tol) {
      EquilibriumPoint eq;
      eq.x_e = x;
      eq.u_e = u;
      eq.residual = F.lpNorm<Eigen::Infinity>();
      eq.feasible = true;
      return eq;
    }
    const EqJacobian J = equilibrium_jacobian(x, u, d_hat, params);
    Eigen::FullPivLU<EqJacobian> lu(J);
    if (!lu.isInvertible()) {
      // Singular along the iteration path: hand over to the regularized
      // least-squares solver.
      return solve_equilibrium_optimization(ref, d_hat, params);
    }
    const ResidualVec step = lu.solve(F);
    x -= step.head<kStateDim>();
    u -= step.tail<kInputDim>();
    x[kIdxDelta] = std::clamp(x[kIdxDelta], -kIterateAngleBound,
                              kIterateAngleBound);
    x[kIdxPhi] = std::clamp(x[kIdxPhi], -kIterateAngleBound,
                            kIterateAngleBound);
    F = equilibrium_residual(x, u, d_hat, ref, params);
  }
  std::ostringstream msg;
  msg << "equilibrium Newton iteration did not converge in "
      << max_iterations << " iterations; last residual "
      << F.lpNorm<Eigen::Infinity>() << ", last iterate x=["
      << x.transpose() << "], u=[" << u.transpose() << "]";
  throw SolverError(msg.str());
}

EquilibriumPoint solve_equilibrium_optimization(const Reference& ref,
                                                const DisturbanceVec& d_hat,
                                                const RobotParams& params,
                                                EquilibriumWeights weights) {
  // Gauss-Newton on the stacked residual [F; sqrt(w_x) x; sqrt(w_u) u].
  constexpr int kResDim = kEqDim + kStateDim + kInputDim;
  StateVec x = StateVec::Zero();
  InputVec u = InputVec::Zero();
  const double sw_x = std::sqrt(weights.w_x);
  const double sw_u = std::sqrt(weights.w_u);

  auto stacked = [&](const StateVec& xs, const InputVec& us) {
    Eigen::Matrix<double, kResDim, 1> rv;
    rv.head<kEqDim>() = equilibrium_residual(xs, us, d_hat, ref, params);
    rv.segment<kStateDim>(kEqDim) = sw_x * xs;
    rv.tail<kInputDim>() = sw_u * us;
    return rv;
  };

  Eigen::Matrix<double, kResDim, 1> rv = stacked(x, u);
  double best_cost = rv.squaredNorm();
  StateVec best_x = x;
  InputVec best_u = u;

  constexpr int kMaxIters = 200;
  double damping = 1e-10;
  for (int iter = 0; iter < kMaxIters; ++iter) {
    Eigen::Matrix<double, kResDim, kEqDim> J;
    J.setZero();
    J.block<kEqDim, kEqDim>(0, 0) = equilibrium_jacobian(x, u, d_hat, params);
    J.block<kStateDim, kStateDim>(kEqDim, 0) =
        sw_x * StateMat::Identity();
    J.block<kInputDim, kInputDim>(kEqDim + kStateDim, kStateDim) =
        sw_u * Eigen::Matrix<double, kInputDim, kInputDim>::Identity();

    const EqJacobian JtJ =
        J.transpose() * J + damping * EqJacobian::Identity();
    const ResidualVec grad = J.transpose() * rv;
    if (grad.lpNorm<Eigen::Infinity>() < 1e-14) {
      break;
    }
    const ResidualVec step = JtJ.ldlt().solve(grad);

    StateVec x_new = x - step.head<kStateDim>();
    InputVec u_new = u - step.tail<kInputDim>();
    x_new[kIdxDelta] = std::clamp(x_new[kIdxDelta], -kIterateAngleBound,
                                  kIterateAngleBound);
    x_new[kIdxPhi] = std::clamp(x_new[kIdxPhi], -kIterateAngleBound,
                                kIterateAngleBound);
    const auto rv_new = stacked(x_new, u_new);
    const double cost_new = rv_new.squaredNorm();
    if (cost_new < best_cost) {
      x = x_new;
      u = u_new;
      rv = rv_new;
      best_cost = cost_new;
      best_x = x;
      best_u = u;
      damping = std::max(damping * 0.3, 1e-12);
      if (step.lpNorm<Eigen::Infinity>() < 1e-13) {
        break;
      }
    } else {
      damping = std::min(damping * 10.0, 1e8);
      if (damping >= 1e8) {
        break;
      }
    }
  }

  // Feasibility polish: with near-pure-feasibility weights the
  // regularization still biases the minimizer off the exact root; a few
  // unregularized Gauss-Newton steps remove that bias when a root exists.
  // Heavy user weights keep their regularized trade-off untouched.
  const bool polish = weights.w_x <= 1e-6 && weights.w_u <= 1e-6;
  double best_residual =
      equilibrium_residual(best_x, best_u, d_hat, ref, params).squaredNorm();
  x = best_x;
  u = best_u;
  for (int iter = 0; polish && iter < 10; ++iter) {
    const EqJacobian J = equilibrium_jacobian(x, u, d_hat, params);
    const ResidualVec F = equilibrium_residual(x, u, d_hat, ref, params);
    const EqJacobian JtJ =
        J.transpose() * J + 1e-12 * EqJacobian::Identity();
    const ResidualVec step = JtJ.ldlt().solve(J.transpose() * F);
    x -= step.head<kStateDim>();
    u -= step.tail<kInputDim>();
    x[kIdxDelta] = std::clamp(x[kIdxDelta], -kIterateAngleBound,
                              kIterateAngleBound);
    x[kIdxPhi] = std::clamp(x[kIdxPhi], -kIterateAngleBound,
                            kIterateAngleBound);
    const double res =
        equilibrium_residual(x, u, d_hat, ref, params).squaredNorm();
    if (res < best_residual) {
      best_residual = res;
      best_x = x;
      best_u = u;
    } else {
      break;
    }
  }

  EquilibriumPoint eq;
  eq.x_e = best_x;
  eq.u_e = best_u;
  eq.residual = equilibrium_residual(best_x, best_u, d_hat, ref, params)
                    .lpNorm<Eigen::Infinity>();
  eq.feasible = eq.residual < 1e-9;
  return eq;
}

}  // namespace sttw
