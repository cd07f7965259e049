#include "knotph/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace knotph::svg {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  static constexpr double left = 60, top = 40, plot_w = 420, plot_h = 360;

  void fit(const std::vector<Series>& series) {
    double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x, lo_y = lo_x, hi_y = -lo_x;
    for (const auto& s : series)
      for (const auto& [x, y] : s.points) {
        if (!std::isfinite(x) || !std::isfinite(y)) continue;
        lo_x = std::min(lo_x, x), hi_x = std::max(hi_x, x);
        lo_y = std::min(lo_y, y), hi_y = std::max(hi_y, y);
      }
    if (!std::isfinite(lo_x)) lo_x = 0, hi_x = 1, lo_y = 0, hi_y = 1;
    const double px = (hi_x - lo_x) * 0.05 + 1e-9, py = (hi_y - lo_y) * 0.05 + 1e-9;
    x0 = lo_x - px, x1 = hi_x + px, y0 = lo_y - py, y1 = hi_y + py;
  }
  double sx(double x) const { return left + (x - x0) / (x1 - x0) * plot_w; }
  double sy(double y) const { return top + plot_h - (y - y0) / (y1 - y0) * plot_h; }

  void axes(Document& doc, const std::string& title) const {
    doc.text(left + plot_w / 2, 22, title, 14, "middle");
    doc.line(left, top + plot_h, left + plot_w, top + plot_h, "#444");
    doc.line(left, top, left, top + plot_h, "#444");
    doc.text(left, top + plot_h + 16, num(x0), 10, "start");
    doc.text(left + plot_w, top + plot_h + 16, num(x1), 10, "end");
    doc.text(left - 4, top + plot_h, num(y0), 10, "end");
    doc.text(left - 4, top + 10, num(y1), 10, "end");
  }

  void legend(Document& doc, const std::vector<Series>& series) const {
    for (std::size_t i = 0; i < series.size(); ++i) {
      const double y = top + 10 + 18 * static_cast<double>(i);
      doc.rect(left + plot_w + 20, y - 9, 10, 10, palette(i));
      doc.text(left + plot_w + 36, y, series[i].label, 11);
    }
  }
};

}  // namespace

Document::Document(double width, double height) : width_(width), height_(height) {}

void Document::line(double x1, double y1, double x2, double y2, const std::string& stroke, double width,
                    bool dashed) {
  body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
           "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"" +
           (dashed ? " stroke-dasharray=\"4 3\"" : "") + "/>\n";
}

void Document::polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke, double width) {
  if (pts.empty()) return;
  body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) body_ += (i ? " " : "") + num(pts[i].first) + "," + num(pts[i].second);
  body_ += "\"/>\n";
}

void Document::circle(double cx, double cy, double r, const std::string& fill) {
  body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" + fill + "\"/>\n";
}

void Document::rect(double x, double y, double w, double h, const std::string& fill) {
  body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
           "\" fill=\"" + fill + "\"/>\n";
}

void Document::text(double x, double y, const std::string& s, double size, const std::string& anchor) {
  body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" + num(size) +
           "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>\n";
}

std::string Document::str() const {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" + num(height_) +
         "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
         body_ + "</svg>\n";
}

std::string palette(std::size_t i) {
  static const char* const colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                       "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return colors[i % 10];
}

std::string scatter_plot(const std::string& title, const std::vector<Series>& series) {
  Frame f;
  f.fit(series);
  Document doc(640, 440);
  f.axes(doc, title);
  for (std::size_t i = 0; i < series.size(); ++i)
    for (const auto& [x, y] : series[i].points) doc.circle(f.sx(x), f.sy(y), 4, palette(i));
  f.legend(doc, series);
  return doc.str();
}

std::string line_plot(const std::string& title, const std::string& x_label, const std::vector<Series>& series) {
  Frame f;
  f.fit(series);
  Document doc(640, 460);
  f.axes(doc, title);
  doc.text(Frame::left + Frame::plot_w / 2, Frame::top + Frame::plot_h + 32, x_label, 11, "middle");
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::vector<std::pair<double, double>> run;
    const auto flush = [&] {
      doc.polyline(run, palette(i), 2);
      run.clear();
    };
    for (const auto& [x, y] : series[i].points) {
      if (!std::isfinite(y)) {
        flush();
        continue;
      }
      run.push_back({f.sx(x), f.sy(y)});
      doc.circle(f.sx(x), f.sy(y), 3, palette(i));
    }
    flush();
  }
  f.legend(doc, series);
  return doc.str();
}

std::string heat_map(const std::string& title, const std::vector<std::string>& labels,
                     const std::vector<double>& values) {
  const std::size_t n = labels.size();
  const double cell = n ? std::max(4.0, std::min(24.0, 480.0 / static_cast<double>(n))) : 24.0;
  const double left = 120, top = 40;
  Document doc(left + cell * static_cast<double>(n) + 40, top + cell * static_cast<double>(n) + 40);
  doc.text(left, 22, title, 14);
  double hi = 0.0;
  for (const double v : values) hi = std::max(hi, v);
  for (std::size_t i = 0; i < n; ++i) {
    doc.text(left - 4, top + cell * (static_cast<double>(i) + 0.75), labels[i], std::min(10.0, cell), "end");
    for (std::size_t j = 0; j < n; ++j) {
      const double t = hi > 0.0 ? values[i * n + j] / hi : 0.0;
      const int shade = static_cast<int>(std::lround(255 * (1.0 - t)));
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02xff", shade, shade);
      doc.rect(left + cell * static_cast<double>(j), top + cell * static_cast<double>(i), cell, cell, fill);
    }
  }
  return doc.str();
}

}  // namespace knotph::svg
