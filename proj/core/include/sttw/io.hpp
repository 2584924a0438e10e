#pragma once

#include <string>
#include <vector>

#include "sttw/simulation.hpp"

namespace sttw {

/// Run log as CSV: header row, fixed column order
/// (t, x[5], u[2], d[2], est_[7], eq_[3], ref_[2], mpc_[3]),
/// floating point printed with 9 significant digits.
std::string runlog_to_csv(const RunLog& log);
void write_runlog_csv(const RunLog& log, const std::string& path);

std::string metrics_to_json(const Metrics& metrics);
void write_metrics_json(const Metrics& metrics, const std::string& path);

/// Aggregate document for a controller sweep, ranked by position MAE.
struct SweepEntry {
  std::string controller;
  std::vector<uint64_t> seeds;
  MetricsAggregate aggregate;
  std::vector<Metrics> runs;
};

std::string sweep_to_json(const std::string& scenario,
                          const std::vector<SweepEntry>& entries);
void write_sweep_json(const std::string& scenario,
                      const std::vector<SweepEntry>& entries,
                      const std::string& path);

}  // namespace sttw
