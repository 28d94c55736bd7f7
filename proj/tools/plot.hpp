#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace rbi::cli {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  /// Draws y = slope * x + intercept across the panel when set.
  bool reference_line = false;
  double ref_slope = 0.0;
  double ref_intercept = 0.0;
};

namespace detail {

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  return colors[i % 8];
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

inline std::string tick(double v) {
  std::ostringstream out;
  out.precision(3);
  out << v;
  return out.str();
}

inline std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  return out;
}

}  // namespace detail

/// Panels laid out left to right in a single static SVG document.
inline std::string render_svg(const std::vector<Panel>& panels) {
  const double pw = 420, ph = 320, ml = 60, mr = 15, mt = 30, mb = 45, legend_h = 18;
  std::size_t max_series = 0;
  for (const auto& p : panels) max_series = std::max(max_series, p.series.size());
  const double width = pw * static_cast<double>(std::max<std::size_t>(panels.size(), 1));
  const double height = ph + legend_h * static_cast<double>(max_series) + 10;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t k = 0; k < panels.size(); ++k) {
    const Panel& p = panels[k];
    const double ox = pw * static_cast<double>(k);
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : p.series) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
        y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
      }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad, y1 += pad;

    const double left = ox + ml, right = ox + pw - mr, top = mt, bottom = ph - mb;
    auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * (right - left); };
    auto sy = [&](double y) { return bottom - (y - y0) / (y1 - y0) * (bottom - top); };

    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
        << detail::escape(p.title) << "</text>\n";
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left << "\" height=\"" << bottom - top
        << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (double t : detail::nice_ticks(x0, x1)) {
      svg << "<line x1=\"" << sx(t) << "\" x2=\"" << sx(t) << "\" y1=\"" << bottom << "\" y2=\"" << bottom + 4
          << "\" stroke=\"#333\"/><text x=\"" << sx(t) << "\" y=\"" << bottom + 15 << "\" text-anchor=\"middle\">"
          << detail::tick(t) << "</text>\n";
    }
    for (double t : detail::nice_ticks(y0, y1)) {
      svg << "<line x1=\"" << left - 4 << "\" x2=\"" << right << "\" y1=\"" << sy(t) << "\" y2=\"" << sy(t)
          << "\" stroke=\"#ddd\"/><text x=\"" << left - 6 << "\" y=\"" << sy(t) + 4 << "\" text-anchor=\"end\">"
          << detail::tick(t) << "</text>\n";
    }
    if (y0 < 0.0 && y1 > 0.0) {
      svg << "<line x1=\"" << left << "\" x2=\"" << right << "\" y1=\"" << sy(0) << "\" y2=\"" << sy(0)
          << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
    }
    if (p.reference_line) {
      svg << "<line x1=\"" << sx(x0) << "\" x2=\"" << sx(x1) << "\" y1=\"" << sy(p.ref_slope * x0 + p.ref_intercept)
          << "\" y2=\"" << sy(p.ref_slope * x1 + p.ref_intercept)
          << "\" stroke=\"#555\" stroke-dasharray=\"6 3\" clip-path=\"url(#clip" << k << ")\"/>\n";
      svg << "<clipPath id=\"clip" << k << "\"><rect x=\"" << left << "\" y=\"" << top << "\" width=\""
          << right - left << "\" height=\"" << bottom - top << "\"/></clipPath>\n";
    }
    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << ph - 12 << "\" text-anchor=\"middle\">"
        << detail::escape(p.x_label) << "</text>\n";
    svg << "<text transform=\"translate(" << ox + 14 << ',' << (top + bottom) / 2
        << ") rotate(-90)\" text-anchor=\"middle\">" << detail::escape(p.y_label) << "</text>\n";

    for (std::size_t i = 0; i < p.series.size(); ++i) {
      const Series& s = p.series[i];
      const char* color = detail::palette(i);
      if (s.markers) {
        for (std::size_t t = 0; t < s.x.size(); ++t) {
          if (!std::isfinite(s.x[t]) || !std::isfinite(s.y[t])) continue;
          svg << "<circle cx=\"" << sx(s.x[t]) << "\" cy=\"" << sy(s.y[t]) << "\" r=\"2\" fill=\"" << color
              << "\" fill-opacity=\"0.6\"/>\n";
        }
      } else {
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t t = 0; t < s.x.size(); ++t) {
          if (std::isfinite(s.x[t]) && std::isfinite(s.y[t])) svg << sx(s.x[t]) << ',' << sy(s.y[t]) << ' ';
        }
        svg << "\"/>\n";
      }
      const double ly = ph + legend_h * static_cast<double>(i) + 4;
      svg << "<rect x=\"" << left << "\" y=\"" << ly << "\" width=\"12\" height=\"10\" fill=\"" << color
          << "\"/><text x=\"" << left + 18 << "\" y=\"" << ly + 9 << "\">" << detail::escape(s.name) << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace rbi::cli
