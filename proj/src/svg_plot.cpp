#include "narrownet/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace narrownet::svg {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string line_plot(const std::string& title, const std::vector<double>& x,
                      const std::vector<Series>& series, int width, int height) {
  const double left = 70, right = 20, top = 30, bottom = 40;
  const double pw = width - left - right;
  const double ph = height - top - bottom;

  double xmin = x.empty() ? 0.0 : x.front();
  double xmax = x.empty() ? 1.0 : x.back();
  if (xmax <= xmin) xmax = xmin + 1.0;
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -ymin;
  for (const auto& s : series)
    for (double v : s.y)
      if (std::isfinite(v)) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
  if (!std::isfinite(ymin)) ymin = 0.0, ymax = 1.0;
  if (ymax <= ymin) ymax = ymin + 1e-3;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto sx = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double v) { return top + (ymax - v) / (ymax - ymin) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
      << escape(title) << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
      << top + ph << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    out << "<text x=\"" << left - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">"
        << num(yv) << "</text>\n";
    out << "<text x=\"" << sx(xv) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
        << num(xv) << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 6
      << "\" text-anchor=\"middle\">epoch</text>\n";

  double ly = top + 10;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
    if (s.dashed) out << " stroke-dasharray=\"6,4\"";
    out << " points=\"";
    for (std::size_t i = 0; i < std::min(x.size(), s.y.size()); ++i)
      if (std::isfinite(s.y[i])) out << sx(x[i]) << ',' << sy(s.y[i]) << ' ';
    out << "\"/>\n";
    out << "<line x1=\"" << left + pw - 120 << "\" y1=\"" << ly << "\" x2=\"" << left + pw - 100
        << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    out << "<text x=\"" << left + pw - 95 << "\" y=\"" << ly + 4 << "\">" << escape(s.name)
        << "</text>\n";
    ly += 14;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace narrownet::svg
