// svg.hpp - static SVG line charts for sweep results. Deterministic output.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lambdamem {

struct SvgSeries {
  std::string name;
  std::vector<double> x, y;
  std::string color = "#1f6fb2";
  bool dashed = false;
};

namespace svg_detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline double nice_step(double range) {
  if (!(range > 0.0)) return 1.0;
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

} // namespace svg_detail

inline std::string svg_line_chart(const std::string& title,
                                  const std::string& xlabel,
                                  const std::string& ylabel,
                                  const std::vector<SvgSeries>& series,
                                  const std::string& comment = {}) {
  using svg_detail::num;
  const int width = 640, height = 440;
  const double ml = 70, mr = 20, mt = 40, mb = 55;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
    for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
  }
  if (!(xmax > xmin)) { xmin -= 0.5; xmax += 0.5; }
  if (!(ymax > ymin)) { ymin -= 0.5; ymax += 0.5; }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr);
  };
  auto py = [&](double y) {
    return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb);
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  if (!comment.empty()) out += "<!-- " + comment + " -->\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(width / 2.0) +
         "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
         "font-family=\"sans-serif\">" + title + "</text>\n";

  // axes
  out += "<line x1=\"" + num(ml) + "\" y1=\"" + num(height - mb) + "\" x2=\"" +
         num(width - mr) + "\" y2=\"" + num(height - mb) +
         "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(ml) +
         "\" y2=\"" + num(height - mb) + "\" stroke=\"black\"/>\n";

  const double xs = svg_detail::nice_step(xmax - xmin);
  for (double t = std::ceil(xmin / xs) * xs; t <= xmax + 1e-12 * xs; t += xs) {
    out += "<line x1=\"" + num(px(t)) + "\" y1=\"" + num(height - mb) +
           "\" x2=\"" + num(px(t)) + "\" y2=\"" + num(height - mb + 5) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(px(t)) + "\" y=\"" + num(height - mb + 20) +
           "\" text-anchor=\"middle\" font-size=\"11\" "
           "font-family=\"sans-serif\">" + num(t) + "</text>\n";
  }
  const double ys = svg_detail::nice_step(ymax - ymin);
  for (double t = std::ceil(ymin / ys) * ys; t <= ymax + 1e-12 * ys; t += ys) {
    out += "<line x1=\"" + num(ml - 5) + "\" y1=\"" + num(py(t)) + "\" x2=\"" +
           num(ml) + "\" y2=\"" + num(py(t)) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(ml - 9) + "\" y=\"" + num(py(t) + 4) +
           "\" text-anchor=\"end\" font-size=\"11\" "
           "font-family=\"sans-serif\">" + num(t) + "</text>\n";
  }
  out += "<text x=\"" + num((ml + width - mr) / 2.0) + "\" y=\"" +
         num(height - 12) +
         "\" text-anchor=\"middle\" font-size=\"13\" "
         "font-family=\"sans-serif\">" + xlabel + "</text>\n";
  out += "<text x=\"16\" y=\"" + num((mt + height - mb) / 2.0) +
         "\" text-anchor=\"middle\" font-size=\"13\" "
         "font-family=\"sans-serif\" transform=\"rotate(-90 16 " +
         num((mt + height - mb) / 2.0) + ")\">" + ylabel + "</text>\n";

  int legend_y = (int)mt;
  for (const auto& s : series) {
    if (s.x.empty()) continue;
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      pts += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
    out += "<polyline fill=\"none\" stroke=\"" + s.color +
           "\" stroke-width=\"1.8\"" +
           (s.dashed ? std::string(" stroke-dasharray=\"6 4\"") : "") +
           " points=\"" + pts + "\"/>\n";
    out += "<line x1=\"" + num(width - mr - 150) + "\" y1=\"" +
           num(legend_y) + "\" x2=\"" + num(width - mr - 120) + "\" y2=\"" +
           num(legend_y) + "\" stroke=\"" + s.color + "\" stroke-width=\"1.8\"" +
           (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    out += "<text x=\"" + num(width - mr - 114) + "\" y=\"" +
           num(legend_y + 4) + "\" font-size=\"12\" "
           "font-family=\"sans-serif\">" + s.name + "</text>\n";
    legend_y += 18;
  }
  out += "</svg>\n";
  return out;
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << body;
}

} // namespace lambdamem
