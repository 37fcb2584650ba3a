#include "mostv/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mostv/errors.hpp"

namespace mostv {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                          "#bcbd22", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string SvgChart::render() const {
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  bool any = false;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!any) {
        x_lo = x_hi = x;
        y_lo = y_hi = y;
        any = true;
      }
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (y_min) y_lo = *y_min;
  if (y_max) y_hi = *y_max;
  if (x_hi == x_lo) x_hi = x_lo + 1;
  if (y_hi == y_lo) y_hi = y_lo + 1;

  const double ml = 70, mr = 180, mt = 40, mb = 55;
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return mt + ph - (y - y_lo) / (y_hi - y_lo) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";

  // Axes with five ticks per side.
  out << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(pw)
      << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 5.0;
    const double yv = y_lo + (y_hi - y_lo) * i / 5.0;
    out << "<line x1=\"" << fmt(px(xv)) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\""
        << fmt(px(xv)) << "\" y2=\"" << fmt(mt + ph + 5) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(mt + ph + 20)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(xv) << "</text>\n";
    out << "<line x1=\"" << fmt(ml - 5) << "\" y1=\"" << fmt(py(yv)) << "\" x2=\""
        << fmt(ml) << "\" y2=\"" << fmt(py(yv)) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << fmt(ml - 9) << "\" y=\"" << fmt(py(yv) + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(yv) << "</text>\n";
  }
  out << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(height - 12.0)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << fmt(mt + ph / 2)
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << fmt(mt + ph / 2) << ")\">" << y_label << "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    if (s.draw_line && s.points.size() > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
      for (const auto& [x, y] : s.points) out << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
      out << "\"/>\n";
    }
    if (s.draw_markers)
      for (const auto& [x, y] : s.points)
        out << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y))
            << "\" r=\"3\" fill=\"" << color << "\"/>\n";

    const double ly = mt + 16 + 18 * static_cast<double>(si);
    out << "<line x1=\"" << fmt(ml + pw + 12) << "\" y1=\"" << fmt(ly) << "\" x2=\""
        << fmt(ml + pw + 34) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fmt(ml + pw + 40) << "\" y=\"" << fmt(ly + 4)
        << "\" font-size=\"12\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void SvgChart::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write figure: " + path);
  out << render();
}

}  // namespace mostv
