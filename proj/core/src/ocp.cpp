#include "sttw/ocp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sttw/dynamics.hpp"
#include "sttw/errors.hpp"

namespace sttw {

void DisturbedTrackStandSystem::dynamics(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& u,
                                         Eigen::VectorXd& xdot) const {
  xdot = f_sys(StateVec(x), InputVec(u), d_hat_, params_);
}

void DisturbedTrackStandSystem::jacobians(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& u,
                                          Eigen::MatrixXd& fx,
                                          Eigen::MatrixXd& fu) const {
  const LinearizedModel lin =
      linearize(StateVec(x), InputVec(u), d_hat_, params_);
  fx = lin.A;
  fu = lin.B_u;
}

void IntegratorAugmentedSystem::dynamics(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& u,
                                         Eigen::VectorXd& xdot) const {
  const StateVec xs = x.head<kStateDim>();
  xdot.resize(kStateDim + kOutputDim);
  xdot.head<kStateDim>() =
      f_sys(xs, InputVec(u), DisturbanceVec::Zero(), params_);
  xdot.tail<kOutputDim>() = output_matrix() * xs - y_ref_;
}

void IntegratorAugmentedSystem::jacobians(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& u,
                                          Eigen::MatrixXd& fx,
                                          Eigen::MatrixXd& fu) const {
  const StateVec xs = x.head<kStateDim>();
  const LinearizedModel lin =
      linearize(xs, InputVec(u), DisturbanceVec::Zero(), params_);
  constexpr int n = kStateDim + kOutputDim;
  fx.setZero(n, n);
  fx.topLeftCorner<kStateDim, kStateDim>() = lin.A;
  fx.bottomLeftCorner<kOutputDim, kStateDim>() = output_matrix();
  fu.setZero(n, kInputDim);
  fu.topRows<kStateDim>() = lin.B_u;
}

void OcpConfig::validate() const {
  if (!(horizon > 0.0)) {
    throw ConfigError("ocp horizon must be positive");
  }
  if (nodes < 2) {
    throw ConfigError("ocp needs at least 2 shooting nodes");
  }
  if (rk4_substeps < 1) {
    throw ConfigError("ocp rk4_substeps must be >= 1");
  }
  if ((q_diag.array() < 0.0).any() || (h_diag.array() < 0.0).any()) {
    throw ConfigError("ocp state weights must be positive semidefinite");
  }
  if ((r_diag.array() <= 0.0).any()) {
    throw ConfigError("ocp input weight must be positive definite");
  }
  if (max_iterations < 1 || !(step_tolerance > 0.0)) {
    throw ConfigError("ocp iteration limits must be positive");
  }
}

Eigen::VectorXd ControlLaw::feedback(const Eigen::VectorXd& x) const {
  return u_ff.front() + K.front() * (x - x_nom.front());
}

ControlLaw ControlLaw::shifted(double dt) const {
  ControlLaw out = *this;
  if (empty() || dt <= 0.0) {
    return out;
  }
  const int n = static_cast<int>(u_ff.size());
  const double t_end = n * node_dt;
  for (int k = 0; k < n; ++k) {
    const double t = k * node_dt + dt;
    const int src = std::min(static_cast<int>(t / node_dt), n - 1);
    out.u_ff[k] = u_ff[src];
    out.K[k] = K[src];
  }
  for (int k = 0; k <= n; ++k) {
    const double t = std::min(k * node_dt + dt, t_end);
    const int lo = std::min(static_cast<int>(t / node_dt), n - 1);
    const double w = t / node_dt - lo;
    out.x_nom[k] = (1.0 - w) * x_nom[lo] + w * x_nom[lo + 1];
  }
  return out;
}

void discrete_step_with_jacobians(const ControlledSystem& system,
                                  const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u, double dt,
                                  int substeps, Eigen::VectorXd& x_next,
                                  Eigen::MatrixXd& A, Eigen::MatrixXd& B) {
  const int nx = system.state_dim();
  const int nu = system.input_dim();
  const double h = dt / substeps;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nx, nx);

  A = I;
  B = Eigen::MatrixXd::Zero(nx, nu);
  Eigen::VectorXd xk = x;
  Eigen::VectorXd f1(nx), f2(nx), f3(nx), f4(nx);
  Eigen::MatrixXd A1(nx, nx), A2(nx, nx), A3(nx, nx), A4(nx, nx);
  Eigen::MatrixXd B1(nx, nu), B2(nx, nu), B3(nx, nu), B4(nx, nu);

  for (int s = 0; s < substeps; ++s) {
    system.dynamics(xk, u, f1);
    system.jacobians(xk, u, A1, B1);
    const Eigen::VectorXd x2 = xk + 0.5 * h * f1;
    system.dynamics(x2, u, f2);
    system.jacobians(x2, u, A2, B2);
    const Eigen::VectorXd x3 = xk + 0.5 * h * f2;
    system.dynamics(x3, u, f3);
    system.jacobians(x3, u, A3, B3);
    const Eigen::VectorXd x4 = xk + h * f3;
    system.dynamics(x4, u, f4);
    system.jacobians(x4, u, A4, B4);

    const Eigen::MatrixXd dk1 = A1;
    const Eigen::MatrixXd dk2 = A2 * (I + 0.5 * h * dk1);
    const Eigen::MatrixXd dk3 = A3 * (I + 0.5 * h * dk2);
    const Eigen::MatrixXd dk4 = A4 * (I + h * dk3);
    const Eigen::MatrixXd Ax =
        I + h / 6.0 * (dk1 + 2.0 * dk2 + 2.0 * dk3 + dk4);

    const Eigen::MatrixXd du1 = B1;
    const Eigen::MatrixXd du2 = A2 * (0.5 * h * du1) + B2;
    const Eigen::MatrixXd du3 = A3 * (0.5 * h * du2) + B3;
    const Eigen::MatrixXd du4 = A4 * (h * du3) + B4;
    const Eigen::MatrixXd Bx = h / 6.0 * (du1 + 2.0 * du2 + 2.0 * du3 + du4);

    B = Ax * B + Bx;
    A = Ax * A;
    xk += h / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
  }
  x_next = xk;
}

Eigen::VectorXd discrete_step(const ControlledSystem& system,
                              const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u, double dt,
                              int substeps) {
  const int nx = system.state_dim();
  const double h = dt / substeps;
  Eigen::VectorXd xk = x;
  Eigen::VectorXd f1(nx), f2(nx), f3(nx), f4(nx);
  for (int s = 0; s < substeps; ++s) {
    system.dynamics(xk, u, f1);
    system.dynamics(xk + 0.5 * h * f1, u, f2);
    system.dynamics(xk + 0.5 * h * f2, u, f3);
    system.dynamics(xk + h * f3, u, f4);
    xk += h / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
  }
  return xk;
}

namespace {

constexpr double kDefectMeritWeight = 1e4;
constexpr double kLevenbergMax = 1e8;

struct Trajectory {
  std::vector<Eigen::VectorXd> x;  // nodes + 1
  std::vector<Eigen::VectorXd> u;  // nodes
};

double trajectory_cost(const Trajectory& traj, const GnmsProblem& p,
                       double node_dt) {
  double cost = 0.0;
  const int n = static_cast<int>(traj.u.size());
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd xe = traj.x[k] - p.x_target;
    const Eigen::VectorXd ue = traj.u[k] - p.u_target;
    cost += node_dt * (xe.dot(p.Q * xe) + ue.dot(p.R * ue));
  }
  const Eigen::VectorXd xe = traj.x[n] - p.x_target;
  cost += xe.dot(p.H * xe);
  return cost;
}

/// Total merit: stage cost plus an l1 penalty on the shooting defects.
/// Returns +inf when the trajectory leaves the model domain.
double merit(const ControlledSystem& system, const Trajectory& traj,
             const GnmsProblem& p, double node_dt, double* defect_norm) {
  double defects = 0.0;
  const int n = static_cast<int>(traj.u.size());
  try {
    for (int k = 0; k < n; ++k) {
      const Eigen::VectorXd xn =
          discrete_step(system, traj.x[k], traj.u[k], node_dt,
                        p.rk4_substeps);
      defects += (xn - traj.x[k + 1]).lpNorm<1>();
    }
    const double cost = trajectory_cost(traj, p, node_dt);
    if (defect_norm != nullptr) {
      *defect_norm = defects;
    }
    if (!std::isfinite(cost) || !std::isfinite(defects)) {
      return std::numeric_limits<double>::infinity();
    }
    return cost + kDefectMeritWeight * defects;
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

GnmsResult gnms_solve(const ControlledSystem& system,
                      const Eigen::VectorXd& x0, const GnmsProblem& problem,
                      const ControlLaw* warm_start) {
  const int nx = system.state_dim();
  const int nu = system.input_dim();
  const int N = problem.nodes;
  const double node_dt = problem.horizon / N;
  const Eigen::MatrixXd Qd = problem.Q * node_dt;
  const Eigen::MatrixXd Rd = problem.R * node_dt;

  Trajectory traj;
  traj.x.resize(N + 1);
  traj.u.resize(N);
  const bool warm = warm_start != nullptr && !warm_start->empty() &&
                    warm_start->x_nom.front().size() == nx &&
                    static_cast<int>(warm_start->u_ff.size()) == N;
  if (warm) {
    traj.x = warm_start->x_nom;
    traj.u = warm_start->u_ff;
  } else {
    for (int k = 0; k <= N; ++k) {
      const double w = static_cast<double>(k) / N;
      traj.x[k] = (1.0 - w) * x0 + w * problem.x_target;
    }
    for (int k = 0; k < N; ++k) {
      traj.u[k] = problem.u_target;
    }
  }

  std::vector<Eigen::MatrixXd> A(N), B(N), K(N);
  std::vector<Eigen::VectorXd> defect(N), kff(N);
  GnmsStats stats;

  double current_merit = merit(system, traj, problem, node_dt,
                               &stats.defect_norm);
  if (!std::isfinite(current_merit)) {
    throw SolverError("gnms: initial trajectory leaves the model domain or "
                      "has non-finite cost");
  }

  double levenberg = 0.0;
  for (int iter = 0; iter < problem.max_iterations; ++iter) {
    // Linearize the discrete dynamics and collect defects.
    Eigen::VectorXd x_next(nx);
    for (int k = 0; k < N; ++k) {
      discrete_step_with_jacobians(system, traj.x[k], traj.u[k], node_dt,
                                   problem.rk4_substeps, x_next, A[k], B[k]);
      defect[k] = x_next - traj.x[k + 1];
    }

    // Riccati backward pass; inflate the Levenberg shift until the input
    // Hessian is positive definite.
    bool backward_ok = false;
    while (!backward_ok) {
      backward_ok = true;
      Eigen::MatrixXd S = problem.H;
      Eigen::VectorXd s_lin = problem.H * (traj.x[N] - problem.x_target);
      for (int k = N - 1; k >= 0; --k) {
        const Eigen::MatrixXd BtS = B[k].transpose() * S;
        Eigen::MatrixXd Quu =
            Rd + BtS * B[k] +
            levenberg * Eigen::MatrixXd::Identity(nu, nu);
        Eigen::LLT<Eigen::MatrixXd> llt(Quu);
        if (llt.info() != Eigen::Success) {
          backward_ok = false;
          levenberg = std::max(levenberg * 10.0, 1e-6);
          if (levenberg > kLevenbergMax) {
            throw SolverError("gnms: Riccati pass failed, input Hessian "
                              "stayed indefinite under regularization");
          }
          break;
        }
        const Eigen::MatrixXd Qux = BtS * A[k];
        const Eigen::VectorXd qu = Rd * (traj.u[k] - problem.u_target) +
                                   B[k].transpose() * (S * defect[k] + s_lin);
        K[k] = -llt.solve(Qux);
        kff[k] = -llt.solve(qu);
        const Eigen::MatrixXd S_new =
            Qd + A[k].transpose() * S * A[k] + Qux.transpose() * K[k];
        s_lin = Qd * (traj.x[k] - problem.x_target) +
                A[k].transpose() * (S * defect[k] + s_lin) +
                Qux.transpose() * kff[k];
        S = 0.5 * (S_new + S_new.transpose()).eval();
      }
    }

    // Defect-correcting forward pass with backtracking on the merit.
    bool accepted = false;
    Trajectory trial;
    trial.x.resize(N + 1);
    trial.u.resize(N);
    double trial_merit = 0.0;
    double trial_defects = 0.0;
    double step_norm = 0.0;
    for (double alpha = 1.0; alpha > 1.0 / 128.0; alpha *= 0.5) {
      Eigen::VectorXd dx = alpha * (x0 - traj.x[0]);
      step_norm = 0.0;
      for (int k = 0; k < N; ++k) {
        trial.x[k] = traj.x[k] + dx;
        const Eigen::VectorXd du = alpha * kff[k] + K[k] * dx;
        trial.u[k] = traj.u[k] + du;
        step_norm = std::max(step_norm, du.lpNorm<Eigen::Infinity>());
        dx = A[k] * dx + B[k] * du + alpha * defect[k];
      }
      trial.x[N] = traj.x[N] + dx;
      trial_merit = merit(system, trial, problem, node_dt, &trial_defects);
      if (trial_merit <
          current_merit - 1e-14 * std::max(1.0, std::abs(current_merit))) {
        accepted = true;
        break;
      }
      if (step_norm < problem.step_tolerance) {
        // The subproblem proposes no meaningful step; we are converged.
        break;
      }
    }

    if (accepted) {
      traj = trial;
      current_merit = trial_merit;
      stats.defect_norm = trial_defects;
      stats.step_norm = step_norm;
      stats.iterations = iter + 1;
      levenberg = levenberg > 1e-6 ? levenberg * 0.1 : 0.0;
      if (step_norm < problem.step_tolerance) {
        stats.converged = true;
        break;
      }
    } else {
      if (step_norm < problem.step_tolerance) {
        stats.converged = true;
        stats.step_norm = step_norm;
        break;
      }
      levenberg = std::max(levenberg * 10.0, 1e-6);
      if (levenberg > kLevenbergMax) {
        std::ostringstream msg;
        msg << "gnms: no acceptable step at iteration " << iter
            << " (merit " << current_merit << ", defects "
            << stats.defect_norm << ", regularization exhausted)";
        throw SolverError(msg.str());
      }
    }
  }

  stats.cost = trajectory_cost(traj, problem, node_dt);
  stats.merit = current_merit;
  if (!std::isfinite(stats.cost)) {
    throw SolverError("gnms: converged trajectory has non-finite cost");
  }

  GnmsResult out;
  out.stats = stats;
  out.law.u_ff = std::move(traj.u);
  out.law.x_nom = std::move(traj.x);
  out.law.K = std::move(K);
  out.law.node_dt = node_dt;
  return out;
}

}  // namespace sttw
