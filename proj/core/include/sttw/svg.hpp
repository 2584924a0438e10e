#pragma once

#include <string>
#include <vector>

#include "sttw/simulation.hpp"

namespace sttw {

struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal polyline time-series plot with axes, ticks and a legend.
void write_svg_timeseries(const std::string& path, const std::string& title,
                          const std::string& y_label,
                          const std::vector<SvgSeries>& series);

/// Standard per-run plots: position/steering tracking, roll angle, true vs
/// estimated disturbance. Files are written into `directory`.
void write_run_plots(const RunLog& log, const std::string& directory);

}  // namespace sttw
