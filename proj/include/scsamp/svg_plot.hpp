#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scsamp/logit.hpp"

namespace scsamp {

namespace svg_detail {

struct Frame {
  double width = 760, height = 520;
  double ml = 70, mr = 20, mt = 20, mb = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool log_y = false;

  double tx(double x) const {
    return ml + (x - x0) / (x1 - x0) * (width - ml - mr);
  }
  double ty(double y) const {
    double v = log_y ? std::log10(std::max(y, 1e-300)) : y;
    return height - mb - (v - y0) / (y1 - y0) * (height - mt - mb);
  }
};

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline void open_svg(std::ostringstream& os, const Frame& f) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width
     << "\" height=\"" << f.height << "\" viewBox=\"0 0 " << f.width << " "
     << f.height << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline void axes(std::ostringstream& os, const Frame& f,
                 const std::string& xlabel, const std::string& ylabel) {
  os << "<line x1=\"" << f.ml << "\" y1=\"" << f.height - f.mb << "\" x2=\""
     << f.width - f.mr << "\" y2=\"" << f.height - f.mb
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << f.ml << "\" y1=\"" << f.mt << "\" x2=\"" << f.ml
     << "\" y2=\"" << f.height - f.mb << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double x = f.x0 + (f.x1 - f.x0) * k / 5;
    os << "<text x=\"" << f.tx(x) << "\" y=\"" << f.height - f.mb + 16
       << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(x)
       << "</text>\n";
    const double yv = f.y0 + (f.y1 - f.y0) * k / 5;
    os << "<text x=\"" << f.ml - 6 << "\" y=\"" << f.ty(f.log_y ? std::pow(10.0, yv) : yv) + 4
       << "\" font-size=\"11\" text-anchor=\"end\">"
       << (f.log_y ? ("1e" + fmt(yv)) : fmt(yv)) << "</text>\n";
  }
  os << "<text x=\"" << (f.ml + f.width - f.mr) / 2 << "\" y=\""
     << f.height - 12 << "\" font-size=\"13\" text-anchor=\"middle\">" << xlabel
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << (f.mt + f.height - f.mb) / 2
     << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (f.mt + f.height - f.mb) / 2 << ")\">" << ylabel << "</text>\n";
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
                                 "#bcbd22", "#e377c2"};
  return colors[i % 10];
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline Csv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("emit_plot: cannot open " + path);
  Csv csv;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("emit_plot: empty file " + path);
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) csv.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != csv.header.size())
      throw std::runtime_error("emit_plot: ragged row in " + path);
    csv.rows.push_back(std::move(row));
  }
  if (csv.rows.empty())
    throw std::runtime_error("emit_plot: no data rows in " + path);
  return csv;
}

}  // namespace svg_detail

enum class PlotKind { profile, mse, phase };

/// Render a CSV produced by the experiment runners as a self-contained SVG:
///   profile: one polyline of phi versus row index per recorded iteration
///   mse:     mean curve with +/-3 stderr bars and the SE prediction, log y
///   phase:   success-rate points with the fitted logistic overlay
inline void emit_plot(const std::string& csv_path, PlotKind kind,
                      const std::string& svg_path) {
  using namespace svg_detail;
  const Csv csv = read_csv(csv_path);
  std::ostringstream os;
  Frame f;

  auto expect_header = [&](const std::vector<std::string>& want) {
    if (csv.header != want)
      throw std::runtime_error("emit_plot: unexpected CSV schema in " +
                               csv_path);
  };

  if (kind == PlotKind::profile) {
    expect_header({"t", "row_index", "phi"});
    std::map<int, std::vector<std::pair<double, double>>> by_t;
    double ymin = 1e300, ymax = -1e300, xmax = 0;
    for (const auto& r : csv.rows) {
      by_t[static_cast<int>(r[0])].push_back({r[1], r[2]});
      ymin = std::min(ymin, r[2]);
      ymax = std::max(ymax, r[2]);
      xmax = std::max(xmax, r[1]);
    }
    f.log_y = true;
    f.x0 = 0;
    f.x1 = std::max(xmax, 1.0);
    f.y0 = std::floor(std::log10(std::max(ymin, 1e-300))) - 0.2;
    f.y1 = std::ceil(std::log10(std::max(ymax, 1e-299))) + 0.2;
    open_svg(os, f);
    axes(os, f, "row index", "phi");
    std::size_t ci = 0;
    for (const auto& [t, pts] : by_t) {
      os << "<polyline fill=\"none\" stroke=\"" << palette(ci)
         << "\" stroke-width=\"1.2\" points=\"";
      for (const auto& [x, y] : pts) os << f.tx(x) << "," << f.ty(y) << " ";
      os << "\"/>\n";
      os << "<text x=\"" << f.width - f.mr - 60 << "\" y=\""
         << f.mt + 14 * (ci + 1) << "\" font-size=\"11\" fill=\""
         << palette(ci) << "\">t=" << t << "</text>\n";
      ++ci;
    }
  } else if (kind == PlotKind::mse) {
    expect_header({"t", "mse_amp_mean", "mse_amp_stderr", "mse_se"});
    double ymin = 1e300, ymax = -1e300, xmax = 0;
    for (const auto& r : csv.rows) {
      ymin = std::min({ymin, r[1], r[3]});
      ymax = std::max({ymax, r[1], r[3]});
      xmax = std::max(xmax, r[0]);
    }
    f.log_y = true;
    f.x0 = 0;
    f.x1 = std::max(xmax, 1.0);
    f.y0 = std::floor(std::log10(std::max(ymin, 1e-300))) - 0.2;
    f.y1 = std::ceil(std::log10(std::max(ymax, 1e-299))) + 0.2;
    open_svg(os, f);
    axes(os, f, "iteration", "mean square error");
    // one error bar per row
    for (const auto& r : csv.rows) {
      const double lo = std::max(r[1] - 3 * r[2], 1e-300);
      const double hi = r[1] + 3 * r[2];
      os << "<line x1=\"" << f.tx(r[0]) << "\" y1=\"" << f.ty(lo) << "\" x2=\""
         << f.tx(r[0]) << "\" y2=\"" << f.ty(hi)
         << "\" stroke=\"#1f77b4\" stroke-width=\"0.8\" class=\"errbar\"/>\n";
    }
    for (int series : {1, 3}) {
      os << "<polyline fill=\"none\" stroke=\""
         << (series == 1 ? "#1f77b4" : "#d62728")
         << "\" stroke-width=\"1.4\" points=\"";
      for (const auto& r : csv.rows)
        os << f.tx(r[0]) << "," << f.ty(std::max(r[series], 1e-300)) << " ";
      os << "\"/>\n";
    }
    os << "<text x=\"" << f.width - f.mr - 140 << "\" y=\"" << f.mt + 14
       << "\" font-size=\"11\" fill=\"#1f77b4\">empirical mean</text>\n";
    os << "<text x=\"" << f.width - f.mr - 140 << "\" y=\"" << f.mt + 28
       << "\" font-size=\"11\" fill=\"#d62728\">state evolution</text>\n";
  } else {
    expect_header({"epsilon", "delta", "instances", "successes",
                   "success_rate"});
    double xmin = 1e300, xmax = -1e300;
    std::vector<LogitPoint> pts;
    for (const auto& r : csv.rows) {
      xmin = std::min(xmin, r[1]);
      xmax = std::max(xmax, r[1]);
      pts.push_back({r[1], static_cast<int>(r[3]), static_cast<int>(r[2])});
    }
    const double pad = std::max(1e-6, 0.05 * (xmax - xmin));
    f.x0 = xmin - pad;
    f.x1 = xmax + pad;
    f.y0 = -0.05;
    f.y1 = 1.05;
    open_svg(os, f);
    axes(os, f, "delta", "success rate");
    for (const auto& r : csv.rows) {
      os << "<circle cx=\"" << f.tx(r[1]) << "\" cy=\"" << f.ty(r[4])
         << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    }
    const LogitFit fit = fit_logit(pts);
    if (std::isfinite(fit.delta_c) && std::isfinite(fit.beta)) {
      os << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.4\" points=\"";
      for (int k = 0; k <= 200; ++k) {
        const double d = f.x0 + (f.x1 - f.x0) * k / 200.0;
        const double p = 1.0 / (1.0 + std::exp(-(d - fit.delta_c) / fit.beta));
        os << f.tx(d) << "," << f.ty(p) << " ";
      }
      os << "\"/>\n";
    }
    if (std::isfinite(fit.delta_c)) {
      os << "<line x1=\"" << f.tx(fit.delta_c) << "\" y1=\"" << f.ty(0.0)
         << "\" x2=\"" << f.tx(fit.delta_c) << "\" y2=\"" << f.ty(1.0)
         << "\" stroke=\"#7f7f7f\" stroke-dasharray=\"4 3\"/>\n";
      os << "<text x=\"" << f.tx(fit.delta_c) + 4 << "\" y=\"" << f.mt + 14
         << "\" font-size=\"11\">delta_c=" << fmt(fit.delta_c) << "</text>\n";
    }
  }

  os << "</svg>\n";
  std::ofstream out(svg_path);
  if (!out) throw std::runtime_error("emit_plot: cannot write " + svg_path);
  out << os.str();
}

}  // namespace scsamp
