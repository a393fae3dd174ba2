#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace vino::plot {

struct Series {
  std::string label;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  int width = 720;
  int height = 400;
};

/// Self-contained SVG line chart with axes, ticks and a legend.
std::string render(const Chart& chart);
void write(const std::string& path, const Chart& chart);

}  // namespace vino::plot
