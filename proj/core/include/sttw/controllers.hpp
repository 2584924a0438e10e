#pragma once

#include <limits>
#include <string>

#include "sttw/equilibrium.hpp"
#include "sttw/observer.hpp"
#include "sttw/ocp.hpp"
#include "sttw/robot_params.hpp"
#include "sttw/types.hpp"

namespace sttw {

enum class ControllerVariant { kEabc, kEcbc, kImpc, kMpc };

ControllerVariant controller_variant_from_string(const std::string& name);
std::string to_string(ControllerVariant variant);

/// ECBC's disturbed equilibrium: one linear solve on the model linearized
/// at the undisturbed equilibrium. Exact for the matched channel, biased
/// in the roll channel with growing |d_phi| (the linear-case shift).
EquilibriumPoint ecbc_equilibrium_shift(const Reference& ref,
                                        const DisturbanceVec& d_hat,
                                        const RobotParams& params);

struct ControllerConfig {
  ControllerVariant variant = ControllerVariant::kEabc;
  OcpConfig ocp;
  ObserverConfig observer;
  double solve_period = 0.01;     ///< equilibrium refresh + NOCP re-solve
  double feedback_period = 0.005; ///< observer update + law evaluation
  double integrator_weight = 10.0;  ///< IMPC: stage weight per error integral
  double integrator_limit = 1.0;    ///< IMPC: anti-windup clamp
  bool use_true_state = false;      ///< feed back the plant state, not x_hat

  void validate() const;
};

/// Per-cycle solver statistics, logged as mpc_* columns.
struct SolveStats {
  int iterations = 0;
  double cost = 0.0;
  double step_norm = 0.0;
};

/// The regulation controller pipeline: disturbance observer, disturbed
/// equilibrium estimator, and a GNMS nonlinear MPC, with the baseline
/// variants selected by configuration.
///
/// update() runs at the feedback rate; the NOCP re-solve and the
/// equilibrium refresh happen every solve_period within it. One instance
/// owns its warm start and integrator state; use one per simulation.
class TrackStandController {
 public:
  TrackStandController(const ControllerConfig& config,
                       const RobotParams& params);

  /// Feedback-rate step. `true_state` is optional and only consumed when
  /// the configuration asks for true-state feedback.
  InputVec update(double t, const MeasVec& y, const Reference& ref,
                  const StateVec* true_state = nullptr);

  const ExtendedEstimate& estimate() const { return estimate_; }
  const EquilibriumPoint& equilibrium() const { return equilibrium_; }
  const SolveStats& solve_stats() const { return stats_; }
  const OutputVec& integrator() const { return integrator_; }

  /// Hands the observer a known initial estimate (skips the measurement
  /// bootstrap on the first update).
  void set_estimate(const ExtendedEstimate& estimate);

 private:
  EquilibriumPoint equilibrium_for(const Reference& ref,
                                   const DisturbanceVec& d_hat);
  void solve(const StateVec& x_hat, const DisturbanceVec& d_hat,
             const Reference& ref);
  const Eigen::MatrixXd& terminal_weight(const Reference& ref, bool augmented);

  ControllerConfig config_;
  RobotParams params_;
  ExtendedEstimate estimate_;
  bool estimate_ready_ = false;
  EquilibriumPoint equilibrium_;
  ControlLaw law_;
  SolveStats stats_;
  OutputVec integrator_ = OutputVec::Zero();
  InputVec u_prev_ = InputVec::Zero();
  long tick_ = 0;
  int ticks_per_solve_ = 2;

  double terminal_cache_delta_ = std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd terminal_cache_;
};

}  // namespace sttw
