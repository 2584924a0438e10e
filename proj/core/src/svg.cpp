#include "sttw/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "sttw/errors.hpp"

namespace sttw {

namespace {

constexpr int kWidth = 860;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 45;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

void write_svg_timeseries(const std::string& path, const std::string& title,
                          const std::string& y_label,
                          const std::vector<SvgSeries>& series) {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const SvgSeries& s : series) {
    for (double v : s.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) {
    ymax = ymin + 1.0;
    ymin -= 1.0;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto px = [&](double x) {
    return kMarginLeft + (x - xmin) / (xmax - xmin) * plot_w;
  };
  auto py = [&](double y) {
    return kMarginTop + (ymax - y) / (ymax - ymin) * plot_h;
  };

  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw ConfigError("cannot open '" + path + "' for writing");
  }
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
    << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
    << "font-size=\"15\">" << title << "</text>\n";

  // Axes with 5 ticks per direction.
  f << "<g stroke=\"#cccccc\" stroke-width=\"1\" font-size=\"11\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    f << "<line x1=\"" << px(xv) << "\" y1=\"" << kMarginTop << "\" x2=\""
      << px(xv) << "\" y2=\"" << kMarginTop + plot_h << "\"/>\n";
    f << "<line x1=\"" << kMarginLeft << "\" y1=\"" << py(yv) << "\" x2=\""
      << kMarginLeft + plot_w << "\" y2=\"" << py(yv) << "\"/>\n";
    f << "<text x=\"" << px(xv) << "\" y=\"" << kHeight - kMarginBottom + 16
      << "\" text-anchor=\"middle\" fill=\"black\" stroke=\"none\">"
      << fmt(xv) << "</text>\n";
    f << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << py(yv) + 4
      << "\" text-anchor=\"end\" fill=\"black\" stroke=\"none\">" << fmt(yv)
      << "</text>\n";
  }
  f << "</g>\n";
  f << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 8
    << "\" text-anchor=\"middle\" font-size=\"12\">t [s]</text>\n";
  f << "<text x=\"16\" y=\"" << kMarginTop + plot_h / 2
    << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
    << kMarginTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

  int legend_y = kMarginTop + 8;
  for (const SvgSeries& s : series) {
    if (s.x.empty()) continue;
    f << "<polyline fill=\"none\" stroke=\"" << s.color
      << "\" stroke-width=\"1.4\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) {
      f << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
    }
    f << "\"/>\n";
    f << "<rect x=\"" << kMarginLeft + plot_w - 150 << "\" y=\""
      << legend_y - 9 << "\" width=\"12\" height=\"3\" fill=\"" << s.color
      << "\"/>\n";
    f << "<text x=\"" << kMarginLeft + plot_w - 132 << "\" y=\"" << legend_y
      << "\" font-size=\"11\">" << s.label << "</text>\n";
    legend_y += 16;
  }
  f << "</svg>\n";
}

void write_run_plots(const RunLog& log, const std::string& directory) {
  const size_t n = log.rows.size();
  std::vector<double> t(n);
  for (size_t i = 0; i < n; ++i) t[i] = log.rows[i].t;

  auto column = [&](auto getter) {
    std::vector<double> v(n);
    for (size_t i = 0; i < n; ++i) v[i] = getter(log.rows[i]);
    return v;
  };

  write_svg_timeseries(
      directory + "/position.svg", "Rear position tracking", "s [m]",
      {{"s", "#1f77b4", t, column([](const RunRecord& r) { return r.x[kIdxS]; })},
       {"s_ref", "#d62728", t,
        column([](const RunRecord& r) { return r.ref.s; })}});
  write_svg_timeseries(
      directory + "/steering.svg", "Steering tracking", "delta [rad]",
      {{"delta", "#1f77b4", t,
        column([](const RunRecord& r) { return r.x[kIdxDelta]; })},
       {"delta_ref", "#d62728", t,
        column([](const RunRecord& r) { return r.ref.delta; })}});
  write_svg_timeseries(
      directory + "/roll.svg", "Roll angle", "phi [rad]",
      {{"phi", "#1f77b4", t,
        column([](const RunRecord& r) { return r.x[kIdxPhi]; })},
       {"eq_phi_e", "#2ca02c", t,
        column([](const RunRecord& r) { return r.eq_phi_e; })}});
  write_svg_timeseries(
      directory + "/disturbance.svg", "Disturbance vs estimate", "[N m]",
      {{"d_r", "#1f77b4", t,
        column([](const RunRecord& r) { return r.d[kIdxDr]; })},
       {"est_d_r", "#17becf", t,
        column([](const RunRecord& r) { return r.est[kStateDim + kIdxDr]; })},
       {"d_phi", "#d62728", t,
        column([](const RunRecord& r) { return r.d[kIdxDPhi]; })},
       {"est_d_phi", "#ff7f0e", t, column([](const RunRecord& r) {
          return r.est[kStateDim + kIdxDPhi];
        })}});
}

}  // namespace sttw
