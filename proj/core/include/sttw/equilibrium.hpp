#pragma once

#include "sttw/dynamics.hpp"
#include "sttw/robot_params.hpp"
#include "sttw/types.hpp"

namespace sttw {

/// A candidate disturbed equilibrium (x_e, u_e) for a given reference.
struct EquilibriumPoint {
  StateVec x_e = StateVec::Zero();
  InputVec u_e = InputVec::Zero();
  double residual = 0.0;  ///< inf-norm of the equilibrium equation at (x_e, u_e)
  bool feasible = false;
};

/// Stacked residual of the equilibrium equation: the five dynamics rows and
/// the two output rows C_o x - y_ref.
Eigen::Matrix<double, kStateDim + kOutputDim, 1> equilibrium_residual(
    const StateVec& x_e, const InputVec& u_e, const DisturbanceVec& d_hat,
    const Reference& ref, const RobotParams& params);

/// Argument of the asin in the closed-form roll equilibrium. Values outside
/// the roll domain mean no track-stand equilibrium exists for this d_hat.
double roll_equilibrium_sine(const Reference& ref, const DisturbanceVec& d_hat,
                             const RobotParams& params);

/// True when the closed-form equilibrium exists inside the valid roll domain.
bool track_stand_feasible(const Reference& ref, const DisturbanceVec& d_hat,
                          const RobotParams& params);

/// Closed-form disturbed track-stand equilibrium:
///   x_e = [s_ref, 0, delta_ref, phi_e, 0],  u_e = [-d_r, 0],
///   phi_e = asin((m g (a c / b) cos(lambda) delta_ref - d_phi) / (m g h)).
/// Throws InfeasibleEquilibrium when the asin argument leaves the feasible
/// roll range; never clamps.
EquilibriumPoint track_stand_equilibrium(const Reference& ref,
                                         const DisturbanceVec& d_hat,
                                         const RobotParams& params);

/// Newton iteration on the 7-equation equilibrium system in the 7 unknowns
/// (x_e, u_e). Converges when the residual inf-norm drops below `tol`.
/// Falls back to the optimization solver if the Jacobian goes singular;
/// throws SolverError on non-convergence.
EquilibriumPoint solve_equilibrium_newton(
    const Reference& ref, const DisturbanceVec& d_hat,
    const RobotParams& params, const StateVec& x0, const InputVec& u0,
    double tol = 1e-10, int max_iterations = 50);

struct EquilibriumWeights {
  double w_x = 1e-8;
  double w_u = 1e-8;
};

/// Damped Gauss-Newton minimization of
///   ||F(x_e, u_e)||^2 + w_x ||x_e||^2 + w_u ||u_e||^2
/// from a zero initial guess. Always returns its best iterate; `feasible`
/// reports whether the residual reached 1e-9.
EquilibriumPoint solve_equilibrium_optimization(
    const Reference& ref, const DisturbanceVec& d_hat,
    const RobotParams& params, EquilibriumWeights weights = {});

}  // namespace sttw
