#include "carenkf/report.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace carenkf {

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing: " + std::strerror(errno));
  }
  out << text;
  out.flush();
  if (!out) {
    throw std::runtime_error("write to '" + path + "' failed");
  }
}

std::vector<std::vector<std::string>> read_rows(const std::string& path, const std::string& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "': " + std::strerror(errno));
  }
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw std::runtime_error("'" + path + "': expected header '" + header + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

double to_real(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw std::runtime_error("bad number '" + s + "'");
  return v;
}

std::string series_csv(const char* header, const std::vector<double>& values) {
  std::string text = std::string(header) + "\n";
  for (std::size_t k = 0; k < values.size(); ++k) {
    text += std::to_string(k + 1) + "," + format_real(values[k]) + "\n";
  }
  return text;
}

}  // namespace

void write_curve_csv(const std::string& path, const std::vector<double>& rmse) {
  write_text(path, series_csv("step,rmse", rmse));
}

void write_beta_csv(const std::string& path, const std::vector<double>& beta) {
  write_text(path, series_csv("step,beta", beta));
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::string text = "scale,filter,mode,rmse_avg,diverged_runs\n";
  for (const SweepRow& r : rows) {
    text += format_real(r.scale) + "," + to_string(r.variant) + "," + to_string(r.mode) + "," +
            format_real(r.rmse_avg) + "," + std::to_string(r.diverged_runs) + "\n";
  }
  write_text(path, text);
}

std::vector<double> read_curve_csv(const std::string& path) {
  std::vector<double> values;
  for (const auto& row : read_rows(path, "step,rmse")) {
    if (row.size() != 2) throw std::runtime_error("'" + path + "': malformed row");
    values.push_back(to_real(row[1]));
  }
  return values;
}

std::vector<SweepRow> read_sweep_csv(const std::string& path) {
  std::vector<SweepRow> rows;
  for (const auto& row : read_rows(path, "scale,filter,mode,rmse_avg,diverged_runs")) {
    if (row.size() != 5) throw std::runtime_error("'" + path + "': malformed row");
    rows.push_back(SweepRow{to_real(row[0]), parse_variant(row[1]), parse_mode(row[2]),
                            to_real(row[3]), std::stoi(row[4])});
  }
  return rows;
}

std::vector<PlotSeries> sweep_series(const std::vector<SweepRow>& rows) {
  std::vector<PlotSeries> series;
  for (const SweepRow& r : rows) {
    const std::string label = to_string(r.variant) + " " + to_string(r.mode);
    auto it = std::find_if(series.begin(), series.end(),
                           [&](const PlotSeries& s) { return s.label == label; });
    if (it == series.end()) {
      series.push_back(PlotSeries{label, {}, {}});
      it = series.end() - 1;
    }
    it->x.push_back(r.scale);
    it->y.push_back(r.rmse_avg);
  }
  return series;
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;
  double pixel_lo = 0.0;
  double pixel_hi = 1.0;

  double map(double v) const {
    const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo))
                         : (v - lo) / (hi - lo);
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }
};

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec) {
  std::vector<PlotSeries> clean;
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const PlotSeries& s : series) {
    PlotSeries c{s.label, {}, {}};
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      const bool ok = std::isfinite(s.y[i]) && s.y[i] > 0.0 && std::isfinite(s.x[i]) &&
                      (!spec.log_x || s.x[i] > 0.0);
      if (!ok) continue;
      c.x.push_back(s.x[i]);
      c.y.push_back(s.y[i]);
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
    if (!c.x.empty()) clean.push_back(std::move(c));
  }
  if (clean.empty()) {
    throw std::invalid_argument("render_svg: no plottable points");
  }
  if (xmax == xmin) {
    xmin = spec.log_x ? xmin / 2.0 : xmin - 0.5;
    xmax = spec.log_x ? xmax * 2.0 : xmax + 0.5;
  }
  // Whole decades on the log y-axis.
  const double ylo = std::pow(10.0, std::floor(std::log10(ymin)));
  double yhi = std::pow(10.0, std::ceil(std::log10(ymax)));
  if (yhi <= ylo) yhi = ylo * 10.0;

  const double left = 80.0;
  const double right = spec.width - 190.0;
  const double top = 40.0;
  const double bottom = spec.height - 60.0;
  const Axis xa{xmin, xmax, spec.log_x, left, right};
  const Axis ya{ylo, yhi, true, bottom, top};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" viewBox=\"0 0 " << spec.width << " " << spec.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num((left + right) / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << escape_xml(spec.title) << "</text>\n";

  // y decades
  for (double d = ylo; d <= yhi * 1.0000001; d *= 10.0) {
    const double py = ya.map(d);
    svg << "<line class=\"ygrid\" x1=\"" << num(left) << "\" y1=\"" << num(py) << "\" x2=\""
        << num(right) << "\" y2=\"" << num(py) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text class=\"ytick\" x=\"" << num(left - 6) << "\" y=\"" << num(py + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(d) << "</text>\n";
  }
  // x ticks: decades for a log axis, 5 intervals otherwise
  std::vector<double> xticks;
  if (spec.log_x) {
    for (double d = std::pow(10.0, std::ceil(std::log10(xmin) - 1e-9)); d <= xmax * 1.0000001;
         d *= 10.0) {
      xticks.push_back(d);
    }
  } else {
    for (int i = 0; i <= 5; ++i) xticks.push_back(xmin + (xmax - xmin) * i / 5.0);
  }
  for (const double t : xticks) {
    const double px = xa.map(t);
    svg << "<text class=\"xtick\" x=\"" << num(px) << "\" y=\"" << num(bottom + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(t) << "</text>\n";
  }
  svg << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left)
      << "\" height=\"" << num(bottom - top) << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(bottom + 42)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape_xml(spec.x_label) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << num((top + bottom) / 2) << "\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 "
      << num((top + bottom) / 2) << ")\">" << escape_xml(spec.y_label) << "</text>\n";

  for (std::size_t s = 0; s < clean.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < clean[s].x.size(); ++i) {
      svg << (i ? " " : "") << num(xa.map(clean[s].x[i])) << "," << num(ya.map(clean[s].y[i]));
    }
    svg << "\"/>\n";
    const double ly = top + 14.0 + 18.0 * static_cast<double>(s);
    svg << "<line x1=\"" << num(right + 14) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(right + 38) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text class=\"legend\" x=\"" << num(right + 44) << "\" y=\"" << num(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(clean[s].label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_svg(const std::string& path, const std::vector<PlotSeries>& series,
               const PlotSpec& spec) {
  write_text(path, render_svg(series, spec));
}

}  // namespace carenkf
