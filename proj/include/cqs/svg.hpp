#pragma once

#include <string>
#include <vector>

namespace cqs::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // NaN breaks the polyline
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  double width = 720.0;
  double height = 440.0;
};

/// Self-contained SVG line plot with axes, ticks and a legend.
std::string render(const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace cqs::svg
