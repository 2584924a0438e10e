#pragma once

#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "sttw/controllers.hpp"
#include "sttw/scenarios.hpp"

namespace sttw {

struct ActuatorConfig {
  double steering_time_constant = 0.02;  ///< first-order lag on delta_dot [s]
  double max_steering_rate = 6.0;        ///< [rad/s]
  double max_rear_torque = 3.0;          ///< [N m]
};

struct SensorNoiseConfig {
  bool enabled = false;
  double s = 1e-4;       ///< position noise std [m]
  double v_r = 1e-3;     ///< velocity noise std [m/s]
  double delta = 1e-4;   ///< steering noise std [rad]
  double phi = 2e-4;     ///< roll noise std [rad]
};

struct HarnessConfig {
  int plant_rate_hz = 1000;    ///< RK4 plant integration
  int feedback_rate_hz = 200;  ///< observer + feedback evaluation + logging
  int solve_rate_hz = 100;     ///< NOCP re-solve + equilibrium refresh
  double metrics_start = 2.0;  ///< evaluation window skips the transient
  double fall_threshold = std::numbers::pi / 4.0;
  ActuatorConfig actuator;
  SensorNoiseConfig noise;

  double plant_dt() const { return 1.0 / plant_rate_hz; }
  int plant_steps_per_feedback() const {
    return plant_rate_hz / feedback_rate_hz;
  }
  int feedback_ticks_per_solve() const {
    return feedback_rate_hz / solve_rate_hz;
  }
  void validate() const;
};

/// One logged sample at the feedback rate.
struct RunRecord {
  double t = 0.0;
  StateVec x = StateVec::Zero();
  InputVec u = InputVec::Zero();  ///< input applied to the plant
  DisturbanceVec d = DisturbanceVec::Zero();
  ExtendedVec est = ExtendedVec::Zero();
  double eq_phi_e = 0.0;
  InputVec eq_u = InputVec::Zero();
  Reference ref;
  int mpc_iterations = 0;
  double mpc_cost = 0.0;
  double mpc_step_norm = 0.0;
};

struct RunLog {
  std::vector<RunRecord> rows;
  bool balance_maintained = true;
  double fault_time = -1.0;  ///< negative when no fault occurred
  std::string fault_reason;
};

struct Metrics {
  double rmse_position = 0.0;
  double mae_position = 0.0;
  double rmse_steering = 0.0;
  double mae_steering = 0.0;
  double max_abs_position_error = 0.0;
  double max_roll = 0.0;  ///< max |phi| over the whole run
  bool balance_maintained = true;
  double fault_time = -1.0;
  std::string fault_reason;
};

struct RunResult {
  RunLog log;
  Metrics metrics;
};

/// RMSE/MAE of the position and steering tracking errors over
/// [window_start, window_end]; max excursions; balance flag copied from the
/// log. Throws ConfigError when the window contains no samples.
Metrics compute_metrics(const RunLog& log, double window_start,
                        double window_end =
                            std::numeric_limits<double>::infinity());

/// Deterministic multirate closed-loop simulation: plant RK4 at the plant
/// rate, steering actuator lag + saturation at the plant rate, observer and
/// feedback evaluation at the feedback rate, NOCP re-solve at the solve
/// rate, logging at the feedback rate. Controller faults and fall-over
/// terminate the run and are recorded, never rethrown.
RunResult run_closed_loop(const Scenario& scenario,
                          const ControllerConfig& controller_config,
                          const HarnessConfig& harness,
                          const RobotParams& params);

/// Mean and sample standard deviation per metric over repeated runs.
struct MetricsAggregate {
  int runs = 0;
  int balanced_runs = 0;
  double mean_rmse_position = 0.0, std_rmse_position = 0.0;
  double mean_mae_position = 0.0, std_mae_position = 0.0;
  double mean_rmse_steering = 0.0, std_rmse_steering = 0.0;
  double mean_mae_steering = 0.0, std_mae_steering = 0.0;
  double mean_max_abs_position_error = 0.0;
};

MetricsAggregate aggregate_metrics(const std::vector<Metrics>& metrics);

}  // namespace sttw
