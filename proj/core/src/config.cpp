#include "sttw/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sttw/errors.hpp"

namespace sttw {

namespace {

using nlohmann::json;

constexpr double kDegToRad = std::numbers::pi / 180.0;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + ": " + what);
}

void expect_keys(const json& j, const std::string& section,
                 std::initializer_list<const char*> keys) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) {
      if (key == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      fail(section, "unknown key '" + key + "'");
    }
  }
}

double get_num(const json& j, const std::string& section, const char* key,
               double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) fail(section, std::string(key) + " must be a number");
  return j[key].get<double>();
}

int get_int(const json& j, const std::string& section, const char* key,
            int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) {
    fail(section, std::string(key) + " must be an integer");
  }
  return j[key].get<int>();
}

bool get_bool(const json& j, const std::string& section, const char* key,
              bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) fail(section, std::string(key) + " must be a bool");
  return j[key].get<bool>();
}

template <typename Vec>
void get_diag(const json& j, const std::string& section, const char* key,
              Vec& out) {
  if (!j.contains(key)) return;
  if (!j[key].is_array() || static_cast<int>(j[key].size()) != out.size()) {
    fail(section, std::string(key) + " must be an array of " +
                      std::to_string(out.size()) + " numbers");
  }
  for (int i = 0; i < out.size(); ++i) {
    if (!j[key][i].is_number()) {
      fail(section, std::string(key) + " entries must be numbers");
    }
    out[i] = j[key][i].get<double>();
  }
}

void parse_robot(const json& j, RobotParams& p) {
  expect_keys(j, "robot",
              {"a", "b", "c", "h", "r", "lambda", "m", "I_t", "I_r", "g"});
  p.a = get_num(j, "robot", "a", p.a);
  p.b = get_num(j, "robot", "b", p.b);
  p.c = get_num(j, "robot", "c", p.c);
  p.h = get_num(j, "robot", "h", p.h);
  p.r = get_num(j, "robot", "r", p.r);
  // Table-style configuration carries the caster angle in degrees.
  if (j.contains("lambda")) {
    p.lambda = get_num(j, "robot", "lambda", 25.0) * kDegToRad;
  }
  p.m = get_num(j, "robot", "m", p.m);
  p.I_t = get_num(j, "robot", "I_t", p.I_t);
  p.I_r = get_num(j, "robot", "I_r", p.I_r);
  p.g = get_num(j, "robot", "g", p.g);
  p.validate();
}

void parse_observer(const json& j, ObserverConfig& o) {
  expect_keys(j, "observer",
              {"q_process", "r_measurement", "p_initial", "mode",
               "gain_refresh_threshold"});
  get_diag(j, "observer", "q_process", o.q_process);
  get_diag(j, "observer", "r_measurement", o.r_measurement);
  get_diag(j, "observer", "p_initial", o.p_initial);
  if (j.contains("mode")) {
    const std::string mode = j["mode"].get<std::string>();
    if (mode == "steady-state-gain") {
      o.mode = ObserverMode::kSteadyStateGain;
    } else if (mode == "filtered-covariance") {
      o.mode = ObserverMode::kFilteredCovariance;
    } else {
      fail("observer", "mode must be 'steady-state-gain' or "
                       "'filtered-covariance'");
    }
  }
  o.gain_refresh_threshold =
      get_num(j, "observer", "gain_refresh_threshold",
              o.gain_refresh_threshold);
  o.validate();
}

void parse_ocp(const json& j, OcpConfig& o) {
  expect_keys(j, "ocp",
              {"horizon", "nodes", "rk4_substeps", "q", "r", "h",
               "terminal_from_riccati", "max_iterations", "step_tolerance"});
  o.horizon = get_num(j, "ocp", "horizon", o.horizon);
  o.nodes = get_int(j, "ocp", "nodes", o.nodes);
  o.rk4_substeps = get_int(j, "ocp", "rk4_substeps", o.rk4_substeps);
  get_diag(j, "ocp", "q", o.q_diag);
  get_diag(j, "ocp", "r", o.r_diag);
  get_diag(j, "ocp", "h", o.h_diag);
  o.terminal_from_riccati =
      get_bool(j, "ocp", "terminal_from_riccati", o.terminal_from_riccati);
  o.max_iterations = get_int(j, "ocp", "max_iterations", o.max_iterations);
  o.step_tolerance = get_num(j, "ocp", "step_tolerance", o.step_tolerance);
  o.validate();
}

void parse_harness(const json& j, HarnessConfig& h) {
  expect_keys(j, "harness",
              {"plant_rate_hz", "feedback_rate_hz", "solve_rate_hz",
               "metrics_start", "fall_threshold", "actuator", "noise"});
  h.plant_rate_hz = get_int(j, "harness", "plant_rate_hz", h.plant_rate_hz);
  h.feedback_rate_hz =
      get_int(j, "harness", "feedback_rate_hz", h.feedback_rate_hz);
  h.solve_rate_hz = get_int(j, "harness", "solve_rate_hz", h.solve_rate_hz);
  h.metrics_start = get_num(j, "harness", "metrics_start", h.metrics_start);
  h.fall_threshold = get_num(j, "harness", "fall_threshold", h.fall_threshold);
  if (j.contains("actuator")) {
    const json& a = j["actuator"];
    expect_keys(a, "harness.actuator",
                {"steering_time_constant", "max_steering_rate",
                 "max_rear_torque"});
    h.actuator.steering_time_constant =
        get_num(a, "harness.actuator", "steering_time_constant",
                h.actuator.steering_time_constant);
    h.actuator.max_steering_rate = get_num(
        a, "harness.actuator", "max_steering_rate", h.actuator.max_steering_rate);
    h.actuator.max_rear_torque = get_num(
        a, "harness.actuator", "max_rear_torque", h.actuator.max_rear_torque);
  }
  if (j.contains("noise")) {
    const json& nz = j["noise"];
    expect_keys(nz, "harness.noise", {"enabled", "s", "v_r", "delta", "phi"});
    h.noise.enabled = get_bool(nz, "harness.noise", "enabled", h.noise.enabled);
    h.noise.s = get_num(nz, "harness.noise", "s", h.noise.s);
    h.noise.v_r = get_num(nz, "harness.noise", "v_r", h.noise.v_r);
    h.noise.delta = get_num(nz, "harness.noise", "delta", h.noise.delta);
    h.noise.phi = get_num(nz, "harness.noise", "phi", h.noise.phi);
  }
  h.validate();
}

void parse_scenario(const json& j, ScenarioConfig& s) {
  expect_keys(j, "scenario",
              {"name", "duration", "seed", "delta_ref", "s_ref",
               "initial_roll_offset", "d_phi", "d_r", "ramp_rate_phi",
               "max_angle_deg", "ramp_rate_deg", "tau_ref", "base_d_phi",
               "base_d_r", "base_ramp_time", "drift_amp_phi", "drift_amp_r"});
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail("scenario", "name must be a string");
    s.name = j["name"].get<std::string>();
  }
  s.duration = get_num(j, "scenario", "duration", s.duration);
  if (j.contains("seed")) {
    s.seed = j["seed"].get<uint64_t>();
  }
  s.delta_ref = get_num(j, "scenario", "delta_ref", s.delta_ref);
  s.s_ref = get_num(j, "scenario", "s_ref", s.s_ref);
  s.initial_roll_offset =
      get_num(j, "scenario", "initial_roll_offset", s.initial_roll_offset);
  s.d_phi = get_num(j, "scenario", "d_phi", s.d_phi);
  s.d_r = get_num(j, "scenario", "d_r", s.d_r);
  s.ramp_rate_phi = get_num(j, "scenario", "ramp_rate_phi", s.ramp_rate_phi);
  s.max_angle_deg = get_num(j, "scenario", "max_angle_deg", s.max_angle_deg);
  s.ramp_rate_deg = get_num(j, "scenario", "ramp_rate_deg", s.ramp_rate_deg);
  s.tau_ref = get_num(j, "scenario", "tau_ref", s.tau_ref);
  s.base_d_phi = get_num(j, "scenario", "base_d_phi", s.base_d_phi);
  s.base_d_r = get_num(j, "scenario", "base_d_r", s.base_d_r);
  s.base_ramp_time =
      get_num(j, "scenario", "base_ramp_time", s.base_ramp_time);
  s.drift_amp_phi = get_num(j, "scenario", "drift_amp_phi", s.drift_amp_phi);
  s.drift_amp_r = get_num(j, "scenario", "drift_amp_r", s.drift_amp_r);
}

void parse_controller(const json& j, SimConfig& c) {
  expect_keys(j, "controller",
              {"integrator_weight", "integrator_limit", "use_true_state"});
  c.integrator_weight =
      get_num(j, "controller", "integrator_weight", c.integrator_weight);
  c.integrator_limit =
      get_num(j, "controller", "integrator_limit", c.integrator_limit);
  c.use_true_state =
      get_bool(j, "controller", "use_true_state", c.use_true_state);
}

std::string line_of_offset(const std::string& text, size_t byte) {
  size_t line = 1, col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  std::ostringstream out;
  out << "line " << line << ", column " << col;
  return out.str();
}

}  // namespace

ControllerConfig SimConfig::controller(ControllerVariant variant) const {
  ControllerConfig cfg;
  cfg.variant = variant;
  cfg.ocp = ocp;
  cfg.observer = observer;
  cfg.feedback_period = 1.0 / harness.feedback_rate_hz;
  cfg.solve_period = 1.0 / harness.solve_rate_hz;
  cfg.observer.dt = cfg.feedback_period;
  cfg.integrator_weight = integrator_weight;
  cfg.integrator_limit = integrator_limit;
  cfg.use_true_state = use_true_state;
  return cfg;
}

SimConfig parse_sim_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error at " +
                      line_of_offset(json_text, e.byte) + ": " + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("config root must be a JSON object");
  }
  expect_keys(j, "config",
              {"robot", "observer", "ocp", "harness", "scenario",
               "controller"});
  SimConfig cfg;
  if (j.contains("robot")) parse_robot(j["robot"], cfg.robot);
  if (j.contains("observer")) parse_observer(j["observer"], cfg.observer);
  if (j.contains("ocp")) parse_ocp(j["ocp"], cfg.ocp);
  if (j.contains("harness")) parse_harness(j["harness"], cfg.harness);
  if (j.contains("scenario")) parse_scenario(j["scenario"], cfg.scenario);
  if (j.contains("controller")) parse_controller(j["controller"], cfg);
  return cfg;
}

SimConfig load_sim_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_sim_config(buf.str());
}

std::string sim_config_to_json(const SimConfig& c) {
  json j;
  j["robot"] = {{"a", c.robot.a},         {"b", c.robot.b},
                {"c", c.robot.c},         {"h", c.robot.h},
                {"r", c.robot.r},         {"lambda", c.robot.lambda / kDegToRad},
                {"m", c.robot.m},         {"I_t", c.robot.I_t},
                {"I_r", c.robot.I_r},     {"g", c.robot.g}};
  auto diag = [](const auto& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    return out;
  };
  j["observer"] = {
      {"q_process", diag(c.observer.q_process)},
      {"r_measurement", diag(c.observer.r_measurement)},
      {"p_initial", diag(c.observer.p_initial)},
      {"mode", c.observer.mode == ObserverMode::kSteadyStateGain
                   ? "steady-state-gain"
                   : "filtered-covariance"},
      {"gain_refresh_threshold", c.observer.gain_refresh_threshold}};
  j["ocp"] = {{"horizon", c.ocp.horizon},
              {"nodes", c.ocp.nodes},
              {"rk4_substeps", c.ocp.rk4_substeps},
              {"q", diag(c.ocp.q_diag)},
              {"r", diag(c.ocp.r_diag)},
              {"h", diag(c.ocp.h_diag)},
              {"terminal_from_riccati", c.ocp.terminal_from_riccati},
              {"max_iterations", c.ocp.max_iterations},
              {"step_tolerance", c.ocp.step_tolerance}};
  j["harness"] = {
      {"plant_rate_hz", c.harness.plant_rate_hz},
      {"feedback_rate_hz", c.harness.feedback_rate_hz},
      {"solve_rate_hz", c.harness.solve_rate_hz},
      {"metrics_start", c.harness.metrics_start},
      {"fall_threshold", c.harness.fall_threshold},
      {"actuator",
       {{"steering_time_constant", c.harness.actuator.steering_time_constant},
        {"max_steering_rate", c.harness.actuator.max_steering_rate},
        {"max_rear_torque", c.harness.actuator.max_rear_torque}}},
      {"noise",
       {{"enabled", c.harness.noise.enabled},
        {"s", c.harness.noise.s},
        {"v_r", c.harness.noise.v_r},
        {"delta", c.harness.noise.delta},
        {"phi", c.harness.noise.phi}}}};
  j["scenario"] = {{"name", c.scenario.name},
                   {"duration", c.scenario.duration},
                   {"seed", c.scenario.seed},
                   {"delta_ref", c.scenario.delta_ref},
                   {"s_ref", c.scenario.s_ref},
                   {"initial_roll_offset", c.scenario.initial_roll_offset},
                   {"d_phi", c.scenario.d_phi},
                   {"d_r", c.scenario.d_r},
                   {"ramp_rate_phi", c.scenario.ramp_rate_phi},
                   {"max_angle_deg", c.scenario.max_angle_deg},
                   {"ramp_rate_deg", c.scenario.ramp_rate_deg},
                   {"tau_ref", c.scenario.tau_ref},
                   {"base_d_phi", c.scenario.base_d_phi},
                   {"base_d_r", c.scenario.base_d_r},
                   {"base_ramp_time", c.scenario.base_ramp_time},
                   {"drift_amp_phi", c.scenario.drift_amp_phi},
                   {"drift_amp_r", c.scenario.drift_amp_r}};
  j["controller"] = {{"integrator_weight", c.integrator_weight},
                     {"integrator_limit", c.integrator_limit},
                     {"use_true_state", c.use_true_state}};
  return j.dump(2) + "\n";
}

void write_sim_config(const SimConfig& config, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw ConfigError("cannot open '" + path + "' for writing");
  }
  f << sim_config_to_json(config);
}

}  // namespace sttw
