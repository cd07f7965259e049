#pragma once

#include <string>
#include <vector>

namespace knotph::svg {

/// Minimal static SVG document; coordinates are in pixels, y pointing down.
class Document {
 public:
  Document(double width, double height);

  void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0,
            bool dashed = false);
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke, double width = 1.0);
  void circle(double cx, double cy, double r, const std::string& fill);
  void rect(double x, double y, double w, double h, const std::string& fill);
  void text(double x, double y, const std::string& s, double size = 12.0, const std::string& anchor = "start");

  std::string str() const;

 private:
  double width_, height_;
  std::string body_;
};

/// Fixed categorical palette, cycled.
std::string palette(std::size_t i);

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Scatter plot, one colour per series, with a legend.
std::string scatter_plot(const std::string& title, const std::vector<Series>& series);
/// Line plot sharing the x axis; non-finite y values break the line.
std::string line_plot(const std::string& title, const std::string& x_label, const std::vector<Series>& series);
/// Square heat map of `values` (row-major n x n) labelled by `labels`.
std::string heat_map(const std::string& title, const std::vector<std::string>& labels,
                     const std::vector<double>& values);

}  // namespace knotph::svg
