#ifndef SINKGAN_SVG_HPP
#define SINKGAN_SVG_HPP

#include "sinkgan/measure.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace sinkgan {

struct ScatterSeries {
  Matrix<double> points;  // n x d, d in {1, 2, 3}
  std::string label;
  std::string color;
};

struct ScatterOptions {
  int width = 640;
  int height = 640;
  double radius = 2.0;
  double opacity = 0.6;
  std::string title;
};

/// Projects 3-D points to the plane with a fixed isometric view; 1-D points
/// are placed on the horizontal axis. 2-D points pass through.
Matrix<double> project_for_plot(const Matrix<double> &points);

/// Self-contained SVG scatter plot with axes and a legend. All series share
/// one bounding box. Throws for dimension > 3.
void write_scatter_svg(std::ostream &out, const std::vector<ScatterSeries> &series,
                       const ScatterOptions &options = {});

}  // namespace sinkgan

#endif  // SINKGAN_SVG_HPP
