#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "lqt/csv.hpp"
#include "lqt/error.hpp"

namespace lqt {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

// Largest "nice" tick step (1, 2, or 5 times a power of ten) that yields at
// least `want` intervals over the span.
inline double nice_tick(double span, int want) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / want;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  double nice = 10.0;
  if (norm <= 1.0)
    nice = 1.0;
  else if (norm <= 2.0)
    nice = 2.0;
  else if (norm <= 5.0)
    nice = 5.0;
  return nice * mag;
}

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace detail

// Fixed 800x600 polyline plot with round-number axis ticks and a small
// legend; no external plotting dependency.
inline void write_svg_plot(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<PlotSeries>& series,
                           const std::string& path) {
  const double W = 800.0, H = 600.0;
  const double ml = 70.0, mr = 20.0, mt = 40.0, mb = 50.0;
  const double pw = W - ml - mr, ph = H - mt - mb;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!(xmin < xmax)) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (!(ymin < ymax)) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  const auto py = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(ErrorCode::ScenarioInvalid, "cannot open " + path + " for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" "
         "font-family=\"sans-serif\" font-size=\"13\">\n";
  out << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  out << "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";

  const double xt = detail::nice_tick(xmax - xmin, 5);
  for (double v = std::ceil(xmin / xt) * xt; v <= xmax + 1e-12 * xt; v += xt) {
    const double gx = px(v);
    out << "<line x1=\"" << detail::svg_num(gx) << "\" y1=\"" << detail::svg_num(mt) << "\" x2=\""
        << detail::svg_num(gx) << "\" y2=\"" << detail::svg_num(mt + ph)
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << detail::svg_num(gx) << "\" y=\"" << detail::svg_num(mt + ph + 18)
        << "\" text-anchor=\"middle\">" << detail::svg_num(v) << "</text>\n";
  }
  const double yt = detail::nice_tick(ymax - ymin, 5);
  for (double v = std::ceil(ymin / yt) * yt; v <= ymax + 1e-12 * yt; v += yt) {
    const double gy = py(v);
    out << "<line x1=\"" << detail::svg_num(ml) << "\" y1=\"" << detail::svg_num(gy) << "\" x2=\""
        << detail::svg_num(ml + pw) << "\" y2=\"" << detail::svg_num(gy)
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << detail::svg_num(ml - 8) << "\" y=\"" << detail::svg_num(gy + 4)
        << "\" text-anchor=\"end\">" << detail::svg_num(v) << "</text>\n";
  }
  out << "<rect x=\"" << detail::svg_num(ml) << "\" y=\"" << detail::svg_num(mt) << "\" width=\""
      << detail::svg_num(pw) << "\" height=\"" << detail::svg_num(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << detail::svg_num(ml + pw / 2) << "\" y=\"" << detail::svg_num(H - 10)
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << detail::svg_num(mt + ph / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << detail::svg_num(mt + ph / 2)
      << ")\">" << y_label << "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = colors[si % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    // cap the emitted point count so large logs stay compact
    const size_t stride = std::max<size_t>(1, s.x.size() / 4000);
    for (size_t i = 0; i < s.x.size(); i += stride) {
      if (!std::isfinite(s.y[i])) continue;
      const double cy = std::clamp(s.y[i], ymin, ymax);
      out << detail::svg_num(px(s.x[i])) << ',' << detail::svg_num(py(cy)) << ' ';
    }
    out << "\"/>\n";
    const double ly = mt + 16.0 + 18.0 * static_cast<double>(si);
    out << "<line x1=\"" << detail::svg_num(ml + pw - 150) << "\" y1=\"" << detail::svg_num(ly - 4)
        << "\" x2=\"" << detail::svg_num(ml + pw - 120) << "\" y2=\"" << detail::svg_num(ly - 4)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << detail::svg_num(ml + pw - 114) << "\" y=\"" << detail::svg_num(ly) << "\">"
        << s.label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace lqt
