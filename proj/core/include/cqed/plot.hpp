#pragma once

#include <string>
#include <vector>

#include "cqed/trace.hpp"

namespace cqed {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal deterministic SVG renderers: same input, same bytes.
std::string line_plot_svg(const std::vector<Series>& series, const std::string& x_label,
                          const std::string& y_label, const std::string& title);

// Rows along the vertical (slow) axis, columns along the horizontal (fast)
// axis, fixed viridis-like colormap.
std::string heatmap_svg(const Grid2D& grid, const std::string& title);

}  // namespace cqed
