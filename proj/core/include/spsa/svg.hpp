#pragma once

#include <string>
#include <utility>
#include <vector>

namespace spsa {

/// Minimal static SVG plotter: polylines, filled polygons, markers, log axes,
/// tick labels, legend. Enough for the feasible-region and backbone figures.
class SvgPlot {
 public:
  SvgPlot(int width, int height, std::string x_label, std::string y_label);

  bool log_x = false;
  bool log_y = false;

  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& color, double stroke_width);
  void polygon(const std::vector<std::pair<double, double>>& pts,
               const std::string& color, double fill_opacity);
  void markers(const std::vector<std::pair<double, double>>& pts,
               const std::string& color, double radius);
  void legend(const std::string& label, const std::string& color);

  std::string render() const;

 private:
  struct Series {
    enum Kind { Line, Fill, Marks } kind;
    std::vector<std::pair<double, double>> pts;
    std::string color;
    double param;
  };

  int w_, h_;
  std::string xlabel_, ylabel_;
  std::vector<Series> series_;
  std::vector<std::pair<std::string, std::string>> legend_;
};

}  // namespace spsa
