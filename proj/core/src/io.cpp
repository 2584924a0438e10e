#include "sttw/io.hpp"

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sttw/errors.hpp"

namespace sttw {

namespace {

void append_g9(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  out += buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw ConfigError("cannot open '" + path + "' for writing");
  }
  f << content;
}

nlohmann::json metrics_json(const Metrics& m) {
  nlohmann::json j;
  j["rmse_position"] = m.rmse_position;
  j["mae_position"] = m.mae_position;
  j["rmse_steering"] = m.rmse_steering;
  j["mae_steering"] = m.mae_steering;
  j["max_abs_position_error"] = m.max_abs_position_error;
  j["max_roll"] = m.max_roll;
  j["balance_maintained"] = m.balance_maintained;
  if (m.fault_time >= 0.0) {
    j["fault_time"] = m.fault_time;
    j["fault_reason"] = m.fault_reason;
  }
  return j;
}

nlohmann::json aggregate_json(const MetricsAggregate& a) {
  nlohmann::json j;
  j["runs"] = a.runs;
  j["balanced_runs"] = a.balanced_runs;
  j["rmse_position"] = {{"mean", a.mean_rmse_position},
                        {"std", a.std_rmse_position}};
  j["mae_position"] = {{"mean", a.mean_mae_position},
                       {"std", a.std_mae_position}};
  j["rmse_steering"] = {{"mean", a.mean_rmse_steering},
                        {"std", a.std_rmse_steering}};
  j["mae_steering"] = {{"mean", a.mean_mae_steering},
                       {"std", a.std_mae_steering}};
  j["max_abs_position_error_mean"] = a.mean_max_abs_position_error;
  return j;
}

}  // namespace

std::string runlog_to_csv(const RunLog& log) {
  std::string out =
      "t,s,v_r,delta,phi,phi_dot,tau_r,delta_dot,d_r,d_phi,"
      "est_s,est_v_r,est_delta,est_phi,est_phi_dot,est_d_r,est_d_phi,"
      "eq_phi_e,eq_tau_r,eq_delta_dot,ref_s,ref_delta,"
      "mpc_iterations,mpc_cost,mpc_step_norm\n";
  out.reserve(out.size() + log.rows.size() * 280);
  for (const RunRecord& row : log.rows) {
    append_g9(out, row.t);
    for (int i = 0; i < kStateDim; ++i) {
      out += ',';
      append_g9(out, row.x[i]);
    }
    for (int i = 0; i < kInputDim; ++i) {
      out += ',';
      append_g9(out, row.u[i]);
    }
    for (int i = 0; i < kDisturbanceDim; ++i) {
      out += ',';
      append_g9(out, row.d[i]);
    }
    for (int i = 0; i < kExtendedDim; ++i) {
      out += ',';
      append_g9(out, row.est[i]);
    }
    out += ',';
    append_g9(out, row.eq_phi_e);
    for (int i = 0; i < kInputDim; ++i) {
      out += ',';
      append_g9(out, row.eq_u[i]);
    }
    out += ',';
    append_g9(out, row.ref.s);
    out += ',';
    append_g9(out, row.ref.delta);
    out += ',' + std::to_string(row.mpc_iterations);
    out += ',';
    append_g9(out, row.mpc_cost);
    out += ',';
    append_g9(out, row.mpc_step_norm);
    out += '\n';
  }
  return out;
}

void write_runlog_csv(const RunLog& log, const std::string& path) {
  write_file(path, runlog_to_csv(log));
}

std::string metrics_to_json(const Metrics& metrics) {
  return metrics_json(metrics).dump(2) + "\n";
}

void write_metrics_json(const Metrics& metrics, const std::string& path) {
  write_file(path, metrics_to_json(metrics));
}

std::string sweep_to_json(const std::string& scenario,
                          const std::vector<SweepEntry>& entries) {
  nlohmann::json j;
  j["scenario"] = scenario;
  nlohmann::json controllers = nlohmann::json::object();
  for (const SweepEntry& e : entries) {
    nlohmann::json entry;
    entry["seeds"] = e.seeds;
    entry["aggregate"] = aggregate_json(e.aggregate);
    nlohmann::json runs = nlohmann::json::array();
    for (const Metrics& m : e.runs) {
      runs.push_back(metrics_json(m));
    }
    entry["runs"] = runs;
    controllers[e.controller] = entry;
  }
  j["controllers"] = controllers;

  // Ranking by mean position MAE, best first.
  std::vector<const SweepEntry*> order;
  for (const SweepEntry& e : entries) order.push_back(&e);
  std::sort(order.begin(), order.end(),
            [](const SweepEntry* a, const SweepEntry* b) {
              return a->aggregate.mean_mae_position <
                     b->aggregate.mean_mae_position;
            });
  nlohmann::json ranking = nlohmann::json::array();
  for (const SweepEntry* e : order) {
    ranking.push_back({{"controller", e->controller},
                       {"mae_position_mean", e->aggregate.mean_mae_position}});
  }
  j["ranking"] = ranking;
  return j.dump(2) + "\n";
}

void write_sweep_json(const std::string& scenario,
                      const std::vector<SweepEntry>& entries,
                      const std::string& path) {
  write_file(path, sweep_to_json(scenario, entries));
}

}  // namespace sttw
