#pragma once

#include <string>
#include <vector>

namespace edmlift::pipeline {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  /// Connect the points; otherwise draw markers only.
  bool line = true;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  /// When set, label x = 0, 1, ... with these instead of numbers.
  std::vector<std::string> categories;
};

/// Standalone SVG document with axes, ticks and a legend.
std::string render_svg(const PlotSpec& spec);

}  // namespace edmlift::pipeline
