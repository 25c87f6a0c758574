#include "sinkgan/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace sinkgan {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char *default_color(std::size_t i) {
  static const char *palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b"};
  return palette[i % 6];
}

}  // namespace

Matrix<double> project_for_plot(const Matrix<double> &points) {
  const Index d = points.cols();
  if (d < 1 || d > 3) {
    throw std::invalid_argument("plot: dimension " + std::to_string(d) +
                                " not supported (1 to 3)");
  }
  Matrix<double> out(points.rows(), 2);
  if (d == 1) {
    out.col(0) = points.col(0);
    out.col(1).setZero();
  } else if (d == 2) {
    out = points;
  } else {
    const double c = std::cos(std::numbers::pi / 6.0);
    const double s = std::sin(std::numbers::pi / 6.0);
    out.col(0) = c * (points.col(0) - points.col(2));
    out.col(1) = points.col(1) + s * (points.col(0) + points.col(2));
  }
  return out;
}

void write_scatter_svg(std::ostream &out, const std::vector<ScatterSeries> &series,
                       const ScatterOptions &options) {
  std::vector<Matrix<double>> projected;
  double xmin = std::numeric_limits<double>::infinity();
  double ymin = xmin;
  double xmax = -xmin;
  double ymax = -xmin;
  for (const auto &s : series) {
    projected.push_back(project_for_plot(s.points));
    const auto &p = projected.back();
    if (p.rows() == 0) {
      continue;
    }
    xmin = std::min(xmin, p.col(0).minCoeff());
    xmax = std::max(xmax, p.col(0).maxCoeff());
    ymin = std::min(ymin, p.col(1).minCoeff());
    ymax = std::max(ymax, p.col(1).maxCoeff());
  }
  if (!std::isfinite(xmin)) {
    xmin = ymin = -1.0;
    xmax = ymax = 1.0;
  }
  const double pad_x = std::max(1e-9, 0.05 * (xmax - xmin));
  const double pad_y = std::max(1e-9, 0.05 * (ymax - ymin));
  xmin -= pad_x;
  xmax += pad_x;
  ymin -= pad_y;
  ymax += pad_y;

  const double margin = 40.0;
  const double w = options.width;
  const double h = options.height;
  const auto sx = [&](double x) {
    return margin + (x - xmin) / (xmax - xmin) * (w - 2 * margin);
  };
  const auto sy = [&](double y) {
    return h - margin - (y - ymin) / (ymax - ymin) * (h - 2 * margin);
  };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(options.width) +
       "\" height=\"" + std::to_string(options.height) + "\" viewBox=\"0 0 " +
       std::to_string(options.width) + " " + std::to_string(options.height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!options.title.empty()) {
    s += "<text x=\"" + num(w / 2) + "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">" + escape(options.title) + "</text>\n";
  }
  // Axes along the bottom and left edges of the plotting area.
  s += "<g stroke=\"black\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + num(margin) + "\" y1=\"" + num(h - margin) + "\" x2=\"" +
       num(w - margin) + "\" y2=\"" + num(h - margin) + "\"/>\n";
  s += "<line x1=\"" + num(margin) + "\" y1=\"" + num(margin) + "\" x2=\"" + num(margin) +
       "\" y2=\"" + num(h - margin) + "\"/>\n";
  s += "</g>\n";
  s += "<g font-family=\"sans-serif\" font-size=\"10\">\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = xmin + (xmax - xmin) * t / 4.0;
    const double fy = ymin + (ymax - ymin) * t / 4.0;
    s += "<text x=\"" + num(sx(fx)) + "\" y=\"" + num(h - margin + 14) +
         "\" text-anchor=\"middle\">" + num(fx) + "</text>\n";
    s += "<text x=\"" + num(margin - 4) + "\" y=\"" + num(sy(fy) + 3) +
         "\" text-anchor=\"end\">" + num(fy) + "</text>\n";
  }
  s += "</g>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const std::string color =
        series[k].color.empty() ? default_color(k) : series[k].color;
    s += "<g fill=\"" + escape(color) + "\" fill-opacity=\"" + num(options.opacity) +
         "\">\n";
    const auto &p = projected[k];
    for (Index i = 0; i < p.rows(); ++i) {
      s += "<circle cx=\"" + num(sx(p(i, 0))) + "\" cy=\"" + num(sy(p(i, 1))) +
           "\" r=\"" + num(options.radius) + "\"/>\n";
    }
    s += "</g>\n";
    if (!series[k].label.empty()) {
      const double ly = margin + 16.0 * double(k);
      s += "<circle cx=\"" + num(w - margin - 90) + "\" cy=\"" + num(ly) + "\" r=\"4\" fill=\"" +
           escape(color) + "\"/>\n";
      s += "<text x=\"" + num(w - margin - 80) + "\" y=\"" + num(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(series[k].label) +
           "</text>\n";
    }
  }
  s += "</svg>\n";
  out << s;
}

}  // namespace sinkgan
