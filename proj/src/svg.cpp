#include "myo/svg.hpp"

#include "myo/io.hpp"
#include "myo/types.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace myo {

namespace {
const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                         "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}
}  // namespace

SvgPlot::SvgPlot(std::string title, std::string xlabel, std::string ylabel)
    : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

void SvgPlot::add_series(const std::string& name, const std::vector<double>& x,
                         const std::vector<double>& y) {
  require(x.size() == y.size(), "series x/y size mismatch");
  series_.push_back({name, x, y});
}

void SvgPlot::add_hline(double y, const std::string& label) { hlines_.push_back({y, label}); }

std::string SvgPlot::render(int width, int height) const {
  const double ml = 62, mr = 14, mt = 34, mb = 44;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series_) {
    for (double v : s.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  for (const auto& h : hlines_) {
    ymin = std::min(ymin, h.y);
    ymax = std::max(ymax, h.y);
  }
  if (!std::isfinite(xmin)) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto X = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * pw; };
  auto Y = [&](double v) { return mt + ph - (v - ymin) / (ymax - ymin) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title_ << "</text>\n";

  // axes + ticks
  svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    double fx = xmin + t * (xmax - xmin) / 5.0;
    double fy = ymin + t * (ymax - ymin) / 5.0;
    svg << "<line x1=\"" << X(fx) << "\" y1=\"" << mt + ph << "\" x2=\"" << X(fx) << "\" y2=\""
        << mt + ph + 4 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << X(fx) << "\" y=\"" << mt + ph + 16
        << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt(fx) << "</text>\n";
    svg << "<line x1=\"" << ml - 4 << "\" y1=\"" << Y(fy) << "\" x2=\"" << ml << "\" y2=\"" << Y(fy)
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml - 7 << "\" y=\"" << Y(fy) + 3
        << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(fy) << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 8
      << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel_ << "</text>\n";
  svg << "<text x=\"14\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 " << mt + ph / 2
      << ")\">" << ylabel_ << "</text>\n";

  for (const auto& h : hlines_) {
    svg << "<line x1=\"" << ml << "\" y1=\"" << Y(h.y) << "\" x2=\"" << ml + pw << "\" y2=\""
        << Y(h.y) << "\" stroke=\"#d62728\" stroke-dasharray=\"6 3\"/>\n";
    svg << "<text x=\"" << ml + pw - 4 << "\" y=\"" << Y(h.y) - 4
        << "\" text-anchor=\"end\" font-size=\"10\" fill=\"#d62728\">" << h.label << "</text>\n";
  }

  int ci = 0;
  double ly = mt + 12;
  for (const auto& s : series_) {
    const char* color = kColors[ci % 10];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) svg << fmt(X(s.x[i])) << "," << fmt(Y(s.y[i])) << " ";
    svg << "\"/>\n";
    svg << "<text x=\"" << ml + 6 << "\" y=\"" << ly << "\" font-size=\"10\" fill=\"" << color
        << "\">" << s.name << "</text>\n";
    ly += 12;
    ++ci;
  }
  svg << "</svg>\n";
  return svg.str();
}

void SvgPlot::write(const std::string& path, int width, int height) const {
  std::ofstream out(path);
  require(out.good(), "cannot open svg file for writing: " + path);
  out << render(width, height);
}

}  // namespace myo
