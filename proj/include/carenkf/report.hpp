#pragma once

#include <string>
#include <vector>

#include "carenkf/harness.hpp"

namespace carenkf {

/// %.17g: parses back to the identical double.
std::string format_real(double x);

/// `step,rmse`, one row per step (1-based).
void write_curve_csv(const std::string& path, const std::vector<double>& rmse);
/// `step,beta`
void write_beta_csv(const std::string& path, const std::vector<double>& beta);
/// `scale,filter,mode,rmse_avg,diverged_runs`
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

std::vector<double> read_curve_csv(const std::string& path);
std::vector<SweepRow> read_sweep_csv(const std::string& path);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  int width = 720;
  int height = 440;
};

/// Line chart with a log10 y-axis, one polyline per series and a legend.
/// Non-positive or non-finite points are dropped from a series.
std::string render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec);
void write_svg(const std::string& path, const std::vector<PlotSeries>& series,
               const PlotSpec& spec);

/// Sweep rows grouped into one series per filter, x = scale.
std::vector<PlotSeries> sweep_series(const std::vector<SweepRow>& rows);

}  // namespace carenkf
