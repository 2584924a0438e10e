#include "sttw/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sttw/dynamics.hpp"
#include "sttw/errors.hpp"
#include "sttw/observer.hpp"

namespace sttw {

void HarnessConfig::validate() const {
  if (plant_rate_hz <= 0 || feedback_rate_hz <= 0 || solve_rate_hz <= 0) {
    throw ConfigError("harness rates must be positive");
  }
  if (plant_rate_hz % feedback_rate_hz != 0) {
    throw ConfigError("plant rate must be an integer multiple of the "
                      "feedback rate");
  }
  if (feedback_rate_hz % solve_rate_hz != 0) {
    throw ConfigError("feedback rate must be an integer multiple of the "
                      "solve rate");
  }
  if (!(fall_threshold > 0.0)) {
    throw ConfigError("fall threshold must be positive");
  }
  if (!(actuator.steering_time_constant > 0.0) ||
      !(actuator.max_steering_rate > 0.0) ||
      !(actuator.max_rear_torque > 0.0)) {
    throw ConfigError("actuator constants must be positive");
  }
}

namespace {

// Portable seeded Gaussian via Box-Muller on the raw mt19937_64 stream.
class GaussianSource {
 public:
  explicit GaussianSource(uint64_t seed) : gen_(seed) {}
  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    } while (u1 <= 0.0);
    const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace

Metrics compute_metrics(const RunLog& log, double window_start,
                        double window_end) {
  Metrics m;
  m.balance_maintained = log.balance_maintained;
  m.fault_time = log.fault_time;
  m.fault_reason = log.fault_reason;

  double sum_sq_s = 0.0, sum_abs_s = 0.0;
  double sum_sq_d = 0.0, sum_abs_d = 0.0;
  long count = 0;
  for (const RunRecord& row : log.rows) {
    m.max_roll = std::max(m.max_roll, std::abs(row.x[kIdxPhi]));
    if (row.t < window_start || row.t > window_end) {
      continue;
    }
    const double e_s = row.x[kIdxS] - row.ref.s;
    const double e_d = row.x[kIdxDelta] - row.ref.delta;
    sum_sq_s += e_s * e_s;
    sum_abs_s += std::abs(e_s);
    sum_sq_d += e_d * e_d;
    sum_abs_d += std::abs(e_d);
    m.max_abs_position_error = std::max(m.max_abs_position_error,
                                        std::abs(e_s));
    ++count;
  }
  if (count == 0) {
    throw ConfigError("metrics window contains no samples");
  }
  m.rmse_position = std::sqrt(sum_sq_s / count);
  m.mae_position = sum_abs_s / count;
  m.rmse_steering = std::sqrt(sum_sq_d / count);
  m.mae_steering = sum_abs_d / count;
  return m;
}

RunResult run_closed_loop(const Scenario& scenario,
                          const ControllerConfig& controller_config,
                          const HarnessConfig& harness,
                          const RobotParams& params) {
  harness.validate();
  if (!scenario.disturbance || !scenario.reference) {
    throw ConfigError("scenario profiles are not set");
  }

  ControllerConfig ctrl_cfg = controller_config;
  ctrl_cfg.feedback_period = 1.0 / harness.feedback_rate_hz;
  ctrl_cfg.solve_period = 1.0 / harness.solve_rate_hz;
  ctrl_cfg.observer.dt = ctrl_cfg.feedback_period;
  TrackStandController controller(ctrl_cfg, params);

  const double plant_dt = harness.plant_dt();
  const int steps_per_feedback = harness.plant_steps_per_feedback();
  const long total_steps = std::llround(scenario.duration / plant_dt);

  GaussianSource noise(scenario.seed * 0x2545f4914f6cdd1dULL + 1ULL);
  const SensorNoiseConfig& nz = harness.noise;

  RunResult result;
  result.log.rows.reserve(total_steps / steps_per_feedback + 1);

  StateVec x = scenario.initial_state;
  InputVec u_cmd = InputVec::Zero();
  double realized_rate = 0.0;

  auto record_fault = [&](double t, const std::string& reason) {
    result.log.balance_maintained = false;
    result.log.fault_time = t;
    result.log.fault_reason = reason;
  };

  for (long k = 0; k < total_steps; ++k) {
    const double t = static_cast<double>(k) * plant_dt;
    const bool feedback_tick = (k % steps_per_feedback) == 0;

    if (feedback_tick) {
      MeasVec y = measure(x);
      if (nz.enabled) {
        y[0] += nz.s * noise();
        y[1] += nz.v_r * noise();
        y[2] += nz.delta * noise();
        y[3] += nz.phi * noise();
      }
      const Reference ref = scenario.reference(t);
      try {
        u_cmd = controller.update(t, y, ref, &x);
      } catch (const InfeasibleEquilibrium& e) {
        record_fault(t, std::string("infeasible: ") + e.what());
        break;
      } catch (const SolverError& e) {
        record_fault(t, std::string("solver error: ") + e.what());
        break;
      } catch (const NumericalError& e) {
        record_fault(t, std::string("numerical error: ") + e.what());
        break;
      } catch (const DomainError& e) {
        record_fault(t, std::string("domain exit: ") + e.what());
        break;
      }
    }

    // Steering actuator: first-order lag toward the commanded rate, then
    // rate saturation; rear torque is saturated directly.
    realized_rate += plant_dt / harness.actuator.steering_time_constant *
                     (u_cmd[kIdxDeltaDot] - realized_rate);
    realized_rate = std::clamp(realized_rate, -harness.actuator.max_steering_rate,
                               harness.actuator.max_steering_rate);
    InputVec u_applied;
    u_applied[kIdxTauR] = std::clamp(u_cmd[kIdxTauR],
                                     -harness.actuator.max_rear_torque,
                                     harness.actuator.max_rear_torque);
    u_applied[kIdxDeltaDot] = realized_rate;

    const DisturbanceVec d = scenario.disturbance(t);

    if (feedback_tick) {
      RunRecord row;
      row.t = t;
      row.x = x;
      row.u = u_applied;
      row.d = d;
      row.est = controller.estimate().xbar;
      row.eq_phi_e = controller.equilibrium().x_e[kIdxPhi];
      row.eq_u = controller.equilibrium().u_e;
      row.ref = scenario.reference(t);
      row.mpc_iterations = controller.solve_stats().iterations;
      row.mpc_cost = controller.solve_stats().cost;
      row.mpc_step_norm = controller.solve_stats().step_norm;
      result.log.rows.push_back(row);
    }

    try {
      x = integrate_rk4(x, u_applied, d, params, plant_dt);
    } catch (const DomainError& e) {
      record_fault(t, std::string("domain exit: ") + e.what());
      break;
    }
    if (std::abs(x[kIdxPhi]) >= harness.fall_threshold) {
      record_fault(t + plant_dt, "fell over");
      break;
    }
  }

  // A run that faulted before the evaluation window still needs metrics.
  try {
    result.metrics = compute_metrics(result.log, harness.metrics_start);
  } catch (const ConfigError&) {
    if (!result.log.rows.empty()) {
      result.metrics = compute_metrics(result.log, 0.0);
    } else {
      result.metrics.balance_maintained = result.log.balance_maintained;
      result.metrics.fault_time = result.log.fault_time;
      result.metrics.fault_reason = result.log.fault_reason;
    }
  }
  return result;
}

MetricsAggregate aggregate_metrics(const std::vector<Metrics>& metrics) {
  MetricsAggregate agg;
  agg.runs = static_cast<int>(metrics.size());
  if (metrics.empty()) {
    return agg;
  }
  auto mean_std = [&](auto getter, double& mean, double& std_dev) {
    double sum = 0.0;
    for (const Metrics& m : metrics) sum += getter(m);
    mean = sum / metrics.size();
    double ss = 0.0;
    for (const Metrics& m : metrics) {
      const double d = getter(m) - mean;
      ss += d * d;
    }
    std_dev = metrics.size() > 1
                  ? std::sqrt(ss / (static_cast<double>(metrics.size()) - 1.0))
                  : 0.0;
  };
  mean_std([](const Metrics& m) { return m.rmse_position; },
           agg.mean_rmse_position, agg.std_rmse_position);
  mean_std([](const Metrics& m) { return m.mae_position; },
           agg.mean_mae_position, agg.std_mae_position);
  mean_std([](const Metrics& m) { return m.rmse_steering; },
           agg.mean_rmse_steering, agg.std_rmse_steering);
  mean_std([](const Metrics& m) { return m.mae_steering; },
           agg.mean_mae_steering, agg.std_mae_steering);
  double dummy = 0.0;
  mean_std([](const Metrics& m) { return m.max_abs_position_error; },
           agg.mean_max_abs_position_error, dummy);
  for (const Metrics& m : metrics) {
    agg.balanced_runs += m.balance_maintained ? 1 : 0;
  }
  return agg;
}

}  // namespace sttw
