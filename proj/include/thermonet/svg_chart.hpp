#pragma once

#include <string>
#include <vector>

namespace thermonet {

struct ChartSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> spread;  ///< optional +/- band, same length as y
  bool dashed = false;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<ChartSeries> series;
  int width = 720;
  int height = 420;
};

/// Static SVG line chart with axes, ticks, legend, and shaded spread bands.
/// Output depends only on the input (fixed number formatting).
std::string render_svg(const Chart& chart);

}  // namespace thermonet
