#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "stratlum/design.hpp"
#include "stratlum/errors.hpp"

namespace stratlum::svg {

struct PlotOptions {
  int width = 860;
  int height = 520;
  std::string title;
  std::string x_label;
  std::string y_label;
};

namespace detail {

inline std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Round tick spacing to a 1/2/5 decade multiple.
inline double nice_step(double span, int target_ticks) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag * (1.0 + 1e-12)) return m * mag;
  return 10.0 * mag;
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#4063d8", "#cb3c33", "#389826", "#9558b2",
                                 "#e69f00", "#111111"};
  return colors[i % 6];
}

} // namespace detail

// Line plot of one or more curves with optional labeled peak markers.
inline void write_plot(const std::string& path,
                       const std::vector<SweepCurve>& curves,
                       const std::vector<PeakReport>& peak_reports,
                       const PlotOptions& opt) {
  if (curves.empty()) throw InputError("SVG plot needs at least one curve");
  double xmin = curves[0].abscissa.front(), xmax = xmin;
  double ymin = 0.0, ymax = 0.0;
  for (const auto& c : curves) {
    for (double x : c.abscissa) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
    for (double y : c.values) ymax = std::max(ymax, y);
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  ymax *= 1.08;

  const double ml = 72, mr = 16, mt = 40, mb = 52;
  const double pw = opt.width - ml - mr, ph = opt.height - mt - mb;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width
      << "\" height=\"" << opt.height << "\" viewBox=\"0 0 " << opt.width
      << " " << opt.height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<g font-family=\"sans-serif\" font-size=\"13\">\n";
  if (!opt.title.empty())
    out << "<text x=\"" << opt.width / 2 << "\" y=\"22\" text-anchor=\"middle\""
        << " font-size=\"16\">" << opt.title << "</text>\n";

  const double xstep = detail::nice_step(xmax - xmin, 8);
  const double ystep = detail::nice_step(ymax - ymin, 6);
  out << "<g stroke=\"#cccccc\" stroke-width=\"1\">\n";
  for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9; x += xstep)
    out << "<line x1=\"" << detail::num(px(x)) << "\" y1=\"" << detail::num(mt)
        << "\" x2=\"" << detail::num(px(x)) << "\" y2=\""
        << detail::num(mt + ph) << "\"/>\n";
  for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-9; y += ystep)
    out << "<line x1=\"" << detail::num(ml) << "\" y1=\"" << detail::num(py(y))
        << "\" x2=\"" << detail::num(ml + pw) << "\" y2=\""
        << detail::num(py(y)) << "\"/>\n";
  out << "</g>\n";

  for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9; x += xstep)
    out << "<text x=\"" << detail::num(px(x)) << "\" y=\""
        << detail::num(mt + ph + 18) << "\" text-anchor=\"middle\">"
        << detail::num(x) << "</text>\n";
  for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-9; y += ystep)
    out << "<text x=\"" << detail::num(ml - 6) << "\" y=\""
        << detail::num(py(y) + 4) << "\" text-anchor=\"end\">"
        << detail::num(y) << "</text>\n";
  out << "<text x=\"" << opt.width / 2 << "\" y=\"" << opt.height - 14
      << "\" text-anchor=\"middle\">" << opt.x_label << "</text>\n"
      << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << mt + ph / 2
      << ")\">" << opt.y_label << "</text>\n"
      << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const auto& c = curves[ci];
    out << "<polyline fill=\"none\" stroke=\"" << detail::palette(ci)
        << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < c.abscissa.size(); ++i)
      out << detail::num(px(c.abscissa[i])) << ',' << detail::num(py(c.values[i]))
          << ' ';
    out << "\"/>\n";
    const std::string label = c.label.empty() ? "curve" : c.label;
    out << "<text x=\"" << detail::num(ml + pw - 8) << "\" y=\""
        << detail::num(mt + 18 + 18 * double(ci)) << "\" text-anchor=\"end\""
        << " fill=\"" << detail::palette(ci) << "\">" << label << "</text>\n";
    if (ci < peak_reports.size()) {
      for (const auto& p : peak_reports[ci].peaks) {
        out << "<circle cx=\"" << detail::num(px(p.position_nm)) << "\" cy=\""
            << detail::num(py(p.value)) << "\" r=\"4\" fill=\"none\" stroke=\""
            << detail::palette(ci) << "\" stroke-width=\"1.5\"/>\n"
            << "<text x=\"" << detail::num(px(p.position_nm)) << "\" y=\""
            << detail::num(py(p.value) - 9) << "\" text-anchor=\"middle\""
            << " fill=\"" << detail::palette(ci) << "\">m=" << p.order << " ("
            << detail::num(p.position_nm) << ")</text>\n";
      }
    }
  }
  out << "</g>\n</svg>\n";
  if (!out) throw InputError("failed while writing '" + path + "'");
}

} // namespace stratlum::svg
