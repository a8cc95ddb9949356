#pragma once

#include <string>
#include <vector>

namespace narrownet::svg {

struct Series {
  std::string name;
  std::vector<double> y;
  std::string color = "black";
  bool dashed = false;
};

/// Polylines over a shared x axis with axes, tick labels and a legend.
std::string line_plot(const std::string& title, const std::vector<double>& x,
                      const std::vector<Series>& series, int width = 640, int height = 400);

}  // namespace narrownet::svg
