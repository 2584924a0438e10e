#pragma once

#include <string>

#include "sttw/controllers.hpp"
#include "sttw/simulation.hpp"

namespace sttw {

/// Everything needed to reproduce one run. Defaults are the values used by
/// the acceptance suite; a configuration file overrides fields selectively.
struct SimConfig {
  RobotParams robot;
  ObserverConfig observer;
  OcpConfig ocp;
  HarnessConfig harness;
  ScenarioConfig scenario;
  double integrator_weight = 10.0;
  double integrator_limit = 1.0;
  bool use_true_state = false;

  /// Assembles the controller configuration for one variant, with the
  /// periods derived from the harness rates.
  ControllerConfig controller(ControllerVariant variant) const;
};

/// Parses a JSON document with sections robot / observer / ocp / harness /
/// scenario / controller. Unknown keys and malformed values raise
/// ConfigError with line-precise positions.
SimConfig parse_sim_config(const std::string& json_text);
SimConfig load_sim_config(const std::string& path);

/// Fully resolved configuration as JSON, suitable for reproducing the run.
std::string sim_config_to_json(const SimConfig& config);
void write_sim_config(const SimConfig& config, const std::string& path);

}  // namespace sttw
