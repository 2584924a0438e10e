#pragma once

#include <Eigen/Core>
#include <vector>

#include "sttw/robot_params.hpp"
#include "sttw/types.hpp"

namespace sttw {

/// Continuous-time control system seen by the OCP solver. Dimensions are
/// dynamic so the same solver serves the plain 5-state model and the
/// integrator-augmented 7-state model.
class ControlledSystem {
 public:
  virtual ~ControlledSystem() = default;
  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual void dynamics(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                        Eigen::VectorXd& xdot) const = 0;
  virtual void jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                         Eigen::MatrixXd& fx, Eigen::MatrixXd& fu) const = 0;
};

/// Track-stand dynamics with the disturbance frozen at the estimate used
/// for the current solve.
class DisturbedTrackStandSystem : public ControlledSystem {
 public:
  DisturbedTrackStandSystem(const RobotParams& params,
                            const DisturbanceVec& d_hat)
      : params_(params), d_hat_(d_hat) {}
  int state_dim() const override { return kStateDim; }
  int input_dim() const override { return kInputDim; }
  void dynamics(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                Eigen::VectorXd& xdot) const override;
  void jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                 Eigen::MatrixXd& fx, Eigen::MatrixXd& fu) const override;

 private:
  RobotParams params_;
  DisturbanceVec d_hat_;
};

/// Track-stand dynamics augmented with the integral of the output tracking
/// error (no disturbance model): state [x; z], z_dot = C_o x - y_ref.
class IntegratorAugmentedSystem : public ControlledSystem {
 public:
  IntegratorAugmentedSystem(const RobotParams& params, const OutputVec& y_ref)
      : params_(params), y_ref_(y_ref) {}
  int state_dim() const override { return kStateDim + kOutputDim; }
  int input_dim() const override { return kInputDim; }
  void dynamics(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                Eigen::VectorXd& xdot) const override;
  void jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                 Eigen::MatrixXd& fx, Eigen::MatrixXd& fu) const override;

 private:
  RobotParams params_;
  OutputVec y_ref_;
};

/// Weights and horizon of the receding-horizon NOCP (5-state form, as
/// exposed in configuration files).
struct OcpConfig {
  double horizon = 1.0;  ///< t_f [s]
  int nodes = 20;        ///< shooting intervals
  int rk4_substeps = 5;  ///< integration substeps per node
  Eigen::Matrix<double, kStateDim, 1> q_diag =
      (Eigen::Matrix<double, kStateDim, 1>() << 50.0, 1.0, 20.0, 100.0, 1.0)
          .finished();
  Eigen::Matrix<double, kInputDim, 1> r_diag =
      (Eigen::Matrix<double, kInputDim, 1>() << 1.0, 0.5).finished();
  /// When true the terminal weight is the infinite-horizon Riccati solution
  /// at the nominal equilibrium; otherwise `h_diag` is used directly.
  bool terminal_from_riccati = true;
  Eigen::Matrix<double, kStateDim, 1> h_diag =
      Eigen::Matrix<double, kStateDim, 1>::Zero();
  /// Per-cycle iteration budget. Warm-started receding-horizon solves track
  /// the optimum with 1-3 Gauss-Newton iterations; the first (cold) solve
  /// gets a larger budget inside the controller.
  int max_iterations = 3;
  double step_tolerance = 1e-6;

  Eigen::Matrix<double, kStateDim, kStateDim> Q() const {
    return q_diag.asDiagonal();
  }
  Eigen::Matrix<double, kInputDim, kInputDim> R() const {
    return r_diag.asDiagonal();
  }

  void validate() const;
};

/// Generic GNMS problem; dimensions follow the supplied system. Stage
/// weights are continuous-time densities and get scaled by the node
/// spacing internally; H applies to the terminal state as-is.
struct GnmsProblem {
  double horizon = 1.0;
  int nodes = 20;
  int rk4_substeps = 5;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::MatrixXd H;
  Eigen::VectorXd x_target;
  Eigen::VectorXd u_target;
  int max_iterations = 30;
  double step_tolerance = 1e-6;
};

/// Time-varying feedforward + feedback law returned by the solver.
struct ControlLaw {
  std::vector<Eigen::VectorXd> u_ff;   ///< N feedforward inputs
  std::vector<Eigen::MatrixXd> K;      ///< N feedback gains
  std::vector<Eigen::VectorXd> x_nom;  ///< N+1 nominal states
  double node_dt = 0.0;

  bool empty() const { return u_ff.empty(); }
  /// MPC control law evaluated at the head node:
  /// u = u_ff[0] + K[0] (x - x_nom[0]).
  Eigen::VectorXd feedback(const Eigen::VectorXd& x) const;
  /// Receding-horizon warm start: resample the law `dt` later in time
  /// (piecewise-constant u, linearly interpolated x), holding the tail.
  ControlLaw shifted(double dt) const;
};

struct GnmsStats {
  int iterations = 0;
  double cost = 0.0;
  double merit = 0.0;  ///< cost plus the l1 defect penalty
  double step_norm = 0.0;
  double defect_norm = 0.0;
  bool converged = false;
};

struct GnmsResult {
  ControlLaw law;
  GnmsStats stats;
};

/// One RK4 flow of the system over `dt` (split into `substeps`), together
/// with the exact sensitivities of the discrete map.
void discrete_step_with_jacobians(const ControlledSystem& system,
                                  const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u, double dt,
                                  int substeps, Eigen::VectorXd& x_next,
                                  Eigen::MatrixXd& A, Eigen::MatrixXd& B);

/// Plain RK4 flow of the system (no sensitivities).
Eigen::VectorXd discrete_step(const ControlledSystem& system,
                              const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u, double dt,
                              int substeps);

/// Gauss-Newton multiple shooting. Each iteration linearizes the discrete
/// dynamics per node, solves the LQ subproblem with defects by a Riccati
/// backward pass, and applies the defect-correcting forward pass under a
/// merit line search with Levenberg regularization.
GnmsResult gnms_solve(const ControlledSystem& system,
                      const Eigen::VectorXd& x0, const GnmsProblem& problem,
                      const ControlLaw* warm_start = nullptr);

}  // namespace sttw
