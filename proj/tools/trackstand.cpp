// trackstand: closed-loop track-stand simulation CLI for the STTW robot.
//
// Subcommands:
//   simulate     run one scenario with one controller, write logs/metrics
//   compare      sweep controllers x seeds, write per-run and aggregate data
//   equilibrium  evaluate the disturbed equilibrium estimator standalone
//
// Exit codes: 0 success, 1 run fault (fall-over / controller fault /
// infeasible equilibrium), 2 configuration error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "sttw/config.hpp"
#include "sttw/controllers.hpp"
#include "sttw/equilibrium.hpp"
#include "sttw/errors.hpp"
#include "sttw/io.hpp"
#include "sttw/simulation.hpp"
#include "sttw/svg.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFault = 1;
constexpr int kExitConfigError = 2;

struct CommonOptions {
  std::string config_path;
  std::string scenario;
  std::string out_dir = "runs";
  double duration = -1.0;
  bool plot = false;
};

sttw::SimConfig resolve_config(const CommonOptions& opt) {
  sttw::SimConfig cfg;
  if (!opt.config_path.empty()) {
    cfg = sttw::load_sim_config(opt.config_path);
  }
  if (!opt.scenario.empty()) {
    cfg.scenario.name = opt.scenario;
  }
  if (opt.duration > 0.0) {
    cfg.scenario.duration = opt.duration;
  }
  return cfg;
}

std::vector<uint64_t> parse_seeds(const std::string& spec) {
  std::vector<uint64_t> seeds;
  if (spec.find(',') == std::string::npos) {
    // A single integer N means seeds 0..N-1.
    const long n = std::stol(spec);
    if (n <= 0) {
      throw sttw::ConfigError("--seeds must be positive");
    }
    for (long i = 0; i < n; ++i) seeds.push_back(static_cast<uint64_t>(i));
    return seeds;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    seeds.push_back(std::stoull(item));
  }
  return seeds;
}

struct RunOutcome {
  sttw::RunResult result;
  std::string error;  // nonempty when the run itself threw
};

RunOutcome execute_run(const sttw::SimConfig& cfg,
                       sttw::ControllerVariant variant, uint64_t seed) {
  RunOutcome out;
  try {
    sttw::ScenarioConfig sc = cfg.scenario;
    sc.seed = seed;
    const sttw::Scenario scenario = sttw::make_scenario(sc, cfg.robot);
    out.result = sttw::run_closed_loop(scenario, cfg.controller(variant),
                                       cfg.harness, cfg.robot);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

void write_run_outputs(const sttw::SimConfig& cfg, const sttw::RunResult& run,
                       const std::string& dir, bool plot) {
  fs::create_directories(dir);
  sttw::write_runlog_csv(run.log, dir + "/runlog.csv");
  sttw::write_metrics_json(run.metrics, dir + "/metrics.json");
  sttw::write_sim_config(cfg, dir + "/config.json");
  if (plot) {
    sttw::write_run_plots(run.log, dir);
  }
}

int cmd_simulate(const CommonOptions& opt, const std::string& controller,
                 uint64_t seed) {
  sttw::SimConfig cfg = resolve_config(opt);
  cfg.scenario.seed = seed;
  const sttw::ControllerVariant variant =
      sttw::controller_variant_from_string(controller);

  const RunOutcome outcome = execute_run(cfg, variant, seed);
  if (!outcome.error.empty()) {
    std::cerr << "error: " << outcome.error << "\n";
    return kExitConfigError;
  }
  const std::string dir = opt.out_dir + "/" + cfg.scenario.name + "_" +
                          controller + "_seed" + std::to_string(seed);
  write_run_outputs(cfg, outcome.result, dir, opt.plot);

  const sttw::Metrics& m = outcome.result.metrics;
  std::printf("scenario=%s controller=%s seed=%llu\n",
              cfg.scenario.name.c_str(), controller.c_str(),
              static_cast<unsigned long long>(seed));
  std::printf("  mae_position  = %.6g m\n", m.mae_position);
  std::printf("  rmse_position = %.6g m\n", m.rmse_position);
  std::printf("  mae_steering  = %.6g rad\n", m.mae_steering);
  std::printf("  max |s-s_ref| = %.6g m, max |phi| = %.6g rad\n",
              m.max_abs_position_error, m.max_roll);
  std::printf("  balance_maintained = %s\n",
              m.balance_maintained ? "true" : "false");
  if (!m.balance_maintained) {
    std::printf("  fault at t=%.3f s: %s\n", m.fault_time,
                m.fault_reason.c_str());
    std::printf("  outputs in %s\n", dir.c_str());
    return kExitRunFault;
  }
  std::printf("  outputs in %s\n", dir.c_str());
  return kExitOk;
}

int cmd_compare(const CommonOptions& opt,
                const std::vector<std::string>& controllers,
                const std::string& seeds_spec) {
  if (controllers.size() < 2) {
    std::cerr << "error: compare needs at least two --controller values\n";
    return kExitConfigError;
  }
  const sttw::SimConfig cfg = resolve_config(opt);
  const std::vector<uint64_t> seeds = parse_seeds(seeds_spec);

  struct Job {
    std::string controller;
    uint64_t seed;
    std::future<RunOutcome> future;
  };
  std::vector<Job> jobs;
  for (const std::string& ctrl : controllers) {
    const sttw::ControllerVariant variant =
        sttw::controller_variant_from_string(ctrl);
    for (uint64_t seed : seeds) {
      jobs.push_back({ctrl, seed,
                      std::async(std::launch::async, execute_run, cfg,
                                 variant, seed)});
    }
  }

  std::vector<sttw::SweepEntry> entries;
  size_t job_index = 0;
  bool any_fault = false;
  for (const std::string& ctrl : controllers) {
    sttw::SweepEntry entry;
    entry.controller = ctrl;
    entry.seeds = seeds;
    for (uint64_t seed : seeds) {
      RunOutcome outcome = jobs[job_index++].future.get();
      if (!outcome.error.empty()) {
        std::cerr << "error (" << ctrl << ", seed " << seed
                  << "): " << outcome.error << "\n";
        return kExitConfigError;
      }
      sttw::SimConfig run_cfg = cfg;
      run_cfg.scenario.seed = seed;
      const std::string dir = opt.out_dir + "/" + cfg.scenario.name + "_" +
                              ctrl + "_seed" + std::to_string(seed);
      write_run_outputs(run_cfg, outcome.result, dir, opt.plot);
      any_fault |= !outcome.result.metrics.balance_maintained;
      entry.runs.push_back(outcome.result.metrics);
    }
    entry.aggregate = sttw::aggregate_metrics(entry.runs);
    entries.push_back(std::move(entry));
  }

  fs::create_directories(opt.out_dir);
  sttw::write_sweep_json(cfg.scenario.name, entries,
                         opt.out_dir + "/aggregate.json");

  // Ranked table, best position MAE first.
  std::vector<const sttw::SweepEntry*> order;
  for (const auto& e : entries) order.push_back(&e);
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    return a->aggregate.mean_mae_position < b->aggregate.mean_mae_position;
  });
  std::printf("scenario=%s, %zu seeds per controller\n",
              cfg.scenario.name.c_str(), seeds.size());
  std::printf("%-6s %-14s %-14s %-14s %s\n", "rank", "controller",
              "mae_pos [m]", "rmse_pos [m]", "balanced");
  int rank = 1;
  for (const auto* e : order) {
    std::printf("%-6d %-14s %.4g+-%.2g   %.4g+-%.2g   %d/%d\n", rank++,
                e->controller.c_str(), e->aggregate.mean_mae_position,
                e->aggregate.std_mae_position, e->aggregate.mean_rmse_position,
                e->aggregate.std_rmse_position, e->aggregate.balanced_runs,
                e->aggregate.runs);
  }
  std::printf("aggregate written to %s/aggregate.json\n", opt.out_dir.c_str());
  return any_fault ? kExitRunFault : kExitOk;
}

int cmd_equilibrium(const CommonOptions& opt, double delta_ref, double d_phi,
                    double d_r) {
  const sttw::SimConfig cfg = resolve_config(opt);
  const sttw::Reference ref{0.0, delta_ref};
  const sttw::DisturbanceVec d_hat(d_r, d_phi);
  try {
    const sttw::EquilibriumPoint eq =
        sttw::track_stand_equilibrium(ref, d_hat, cfg.robot);
    nlohmann::json j;
    j["x_e"] = {eq.x_e[0], eq.x_e[1], eq.x_e[2], eq.x_e[3], eq.x_e[4]};
    j["u_e"] = {eq.u_e[0], eq.u_e[1]};
    j["phi_e"] = eq.x_e[sttw::kIdxPhi];
    j["residual"] = eq.residual;
    j["feasible"] = eq.feasible;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  } catch (const sttw::InfeasibleEquilibrium& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitRunFault;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Track-stand control simulation for a single-track "
               "two-wheeled robot"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string controller = "eabc";
  std::vector<std::string> controllers;
  std::string seeds_spec = "1";
  uint64_t seed = 0;
  double delta_ref = 0.3;
  double d_phi = 0.0;
  double d_r = 0.0;

  auto add_common = [&](CLI::App* cmd, bool with_scenario) {
    cmd->add_option("--config", opt.config_path,
                    "JSON configuration file (defaults used when omitted)");
    if (with_scenario) {
      cmd->add_option("--scenario", opt.scenario,
                      "built-in scenario name (constant-disturbance, "
                      "ramp-disturbance, incline-lateral, "
                      "incline-longitudinal, rear-tracking)");
      cmd->add_option("--out", opt.out_dir, "output directory");
      cmd->add_option("--duration", opt.duration,
                      "override the scenario duration [s]");
      cmd->add_flag("--plot", opt.plot, "write SVG time-series plots");
    }
  };

  CLI::App* sim = app.add_subcommand("simulate", "run one closed-loop scenario");
  add_common(sim, true);
  sim->add_option("--controller", controller, "eabc | ecbc | impc | mpc");
  sim->add_option("--seeds", seed, "seed for randomized scenario components");

  CLI::App* cmp = app.add_subcommand(
      "compare", "run a controller x seed grid and aggregate metrics");
  add_common(cmp, true);
  cmp->add_option("--controller", controllers,
                  "controller variant (repeatable)");
  cmp->add_option("--seeds", seeds_spec,
                  "seed count N (runs 0..N-1) or comma-separated list");

  CLI::App* eq = app.add_subcommand(
      "equilibrium", "print the disturbed track-stand equilibrium as JSON");
  add_common(eq, false);
  eq->add_option("--delta-ref", delta_ref, "steering reference [rad]");
  eq->add_option("--d-phi", d_phi, "estimated roll disturbance [N m]");
  eq->add_option("--d-r", d_r, "estimated rear torque disturbance [N m]");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return cmd_simulate(opt, controller, seed);
    }
    if (cmp->parsed()) {
      return cmd_compare(opt, controllers, seeds_spec);
    }
    if (eq->parsed()) {
      return cmd_equilibrium(opt, delta_ref, d_phi, d_r);
    }
  } catch (const sttw::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunFault;
  }
  return kExitConfigError;
}
